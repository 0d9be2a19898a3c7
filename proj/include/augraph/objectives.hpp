#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augraph/tensor.hpp"

namespace augraph {

// Per-clip detection outputs plus the ground truth needed to score them.
// labels: 0/1, or -1 for frames without an annotation for that AU.
// frame_valid marks real frames; padded frames are false and must never
// contribute to losses or metrics.
struct AUPredictions {
  int64_t num_frames = 0;
  int64_t num_aus = 0;
  std::vector<double> scores;      // [T*N] row-major, in [0,1]
  std::vector<int> labels;         // [T*N], values {0,1,-1}
  std::vector<uint8_t> frame_valid;  // [T]
  std::vector<std::string> au_names;

  double score_at(int64_t t, int64_t i) const {
    return scores[static_cast<size_t>(t * num_aus + i)];
  }
  int label_at(int64_t t, int64_t i) const {
    return labels[static_cast<size_t>(t * num_aus + i)];
  }
  void validate() const;
};

struct AuMetric {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricReport {
  std::vector<std::string> au_names;
  std::vector<AuMetric> per_au;
  double average_f1 = 0.0;
  int64_t frames_scored = 0;

  std::string to_text() const;  // table, percent with 1 decimal
  std::string to_json() const;  // full precision
};

// Streaming confusion counts; addition over clips equals the batch result.
struct ConfusionCounts {
  std::vector<int64_t> tp, fp, fn, tn;
  int64_t frames_scored = 0;

  void reset(size_t num_aus);
  size_t num_aus() const { return tp.size(); }
  void accumulate(const AUPredictions& pred, double threshold);
  void merge(const ConfusionCounts& other);
  MetricReport report(const std::vector<std::string>& names) const;
};

// Mean squared error over the pixels of the masked patches only.
// Both tensors are [num_masked_patches x patch_dim]; target is a constant.
Tensor masked_mse_loss(const Tensor& reconstructed, const Tensor& original);

// Multi-label AU loss with down-weighted easy negatives:
//   -mean over scored (t,i) of  y*log(p) + p*(1-y)*log(1-p)
// p clamped to [1e-7, 1-1e-7]; the p weight on the negative term is part of
// the differentiated expression. Frames with frame_valid false and labels of
// -1 are skipped. scores_t must be the [T x N] graph output.
Tensor asymmetric_au_loss(const Tensor& scores_t,
                          const std::vector<int>& labels,
                          const std::vector<uint8_t>& frame_valid);

// Non-differentiable scalar version used by evaluation paths.
double asymmetric_au_loss_value(const AUPredictions& pred);

MetricReport f1_scores(const AUPredictions& pred, double threshold);

constexpr double kLossProbEpsilon = 1e-7;

}  // namespace augraph
