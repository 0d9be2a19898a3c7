#pragma once

#include <string>
#include <vector>

#include "augraph/config.hpp"
#include "augraph/data.hpp"
#include "augraph/model.hpp"
#include "augraph/objectives.hpp"

namespace augraph {

struct PretrainOutcome {
  double initial_masked_mse = 0.0;
  double final_masked_mse = 0.0;
  std::vector<double> loss_curve;  // one value per optimization step
  std::string checkpoint_path;
};

struct TrainOutcome {
  double best_average_f1 = 0.0;
  int best_step = 0;
  std::vector<double> loss_curve;
  MetricReport best_report;  // training-set metrics of the saved weights
  std::string checkpoint_path;
};

// Masked-autoencoder pretraining over every frame in the dataset root
// (labels ignored). Saves <out_dir>/pretrain.ckpt.
PretrainOutcome cmd_pretrain(const RunConfig& cfg, const std::string& out_dir);

// Detection training; keeps the best-average-F1 weights, measured on the
// training set every eval_every steps. Saves <out_dir>/detector.ckpt and a
// JSON metric report next to it.
TrainOutcome cmd_train(const RunConfig& cfg, const std::string& out_dir);

// Segments every video, streams confusion counts, returns the report.
// threshold <= 0 means "use the checkpoint's configured threshold".
MetricReport cmd_eval(const std::string& checkpoint_path,
                      const std::string& dataset_root, double threshold);

// Writes one CSV per video of binarized per-frame AU decisions.
void cmd_predict(const std::string& checkpoint_path,
                 const std::string& dataset_root, const std::string& out_dir,
                 double threshold);

// Shared no-grad evaluation path (also used by training-time validation).
MetricReport evaluate_dataset(const AuDetector& model, const DataSet& data,
                              double threshold);

// Rebuilds a detector from a checkpoint (config echo + weights).
AuDetector detector_from_checkpoint(const CheckpointData& data);

}  // namespace augraph
