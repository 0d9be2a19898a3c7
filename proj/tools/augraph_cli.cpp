// Command-line front end: masked-autoencoder pretraining, detector training,
// evaluation, prediction export, and synthetic dataset generation.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "augraph/check.hpp"
#include "augraph/config.hpp"
#include "augraph/data.hpp"
#include "augraph/logging.hpp"
#include "augraph/trainer.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string dataset;
  std::string out;
  std::string checkpoint;
  std::string init_checkpoint;
  double threshold = -1.0;
  int64_t seed = -1;
  int steps = -1;
  int batch = -1;
  bool no_spatial = false;
  bool no_temporal = false;
  bool no_stgl = false;
  bool freeze_encoder = false;
  bool dynamic_graph = false;
  bool static_graph = false;
};

augraph::RunConfig resolve_config(const CommonOpts& o,
                                  const std::string& mode) {
  augraph::RunConfig cfg = mode == "pretrain"
                               ? augraph::RunConfig::desk_pretrain_preset()
                               : augraph::RunConfig::desk_preset();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    AUG_CHECK(in.good(), "cannot read config ", o.config_path);
    nlohmann::json j = nlohmann::json::parse(in);
    cfg = augraph::RunConfig::apply_json(cfg, j);
  }
  if (!o.dataset.empty()) cfg.dataset_root = o.dataset;
  if (!o.init_checkpoint.empty()) cfg.init_checkpoint = o.init_checkpoint;
  if (o.threshold > 0.0) cfg.threshold = o.threshold;
  if (o.seed >= 0) cfg.seed = static_cast<uint64_t>(o.seed);
  if (o.steps >= 0) cfg.optim.total_steps = o.steps;
  if (o.batch >= 1) cfg.batch_size = o.batch;
  if (o.no_spatial) cfg.stgl.use_spatial = false;
  if (o.no_temporal) cfg.stgl.use_temporal = false;
  if (o.no_stgl) cfg.use_stgl = false;
  if (o.freeze_encoder) cfg.freeze_encoder = true;
  if (o.dynamic_graph) cfg.stgl.dynamic_graph = true;
  if (o.static_graph) cfg.stgl.dynamic_graph = false;
  cfg.mode = mode;
  return cfg;
}

void add_config_flags(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path, "JSON config file");
  cmd->add_option("--seed", o->seed, "RNG seed");
  cmd->add_option("--steps", o->steps, "override optimization step count");
  cmd->add_option("--batch", o->batch, "override batch size");
  cmd->add_option("--threshold", o->threshold, "decision threshold in (0,1)");
  cmd->add_flag("--no-spatial", o->no_spatial, "disable the graph branch");
  cmd->add_flag("--no-temporal", o->no_temporal,
                "disable the temporal branch");
  cmd->add_flag("--no-stgl", o->no_stgl,
                "bypass the graph module entirely (features go straight to "
                "the similarity head)");
  cmd->add_flag("--freeze-encoder", o->freeze_encoder,
                "do not fine-tune encoder weights");
  cmd->add_flag("--dynamic-graph", o->dynamic_graph,
                "rebuild the neighbour graph in every block (default)");
  cmd->add_flag("--static-graph", o->static_graph,
                "build the neighbour graph once per clip");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal AU relational graph detector"};
  app.require_subcommand(1);

  CommonOpts pre_o, train_o, eval_o, pred_o;

  CLI::App* pre = app.add_subcommand("pretrain", "masked-autoencoder pretraining");
  pre->add_option("--dataset", pre_o.dataset, "dataset root")->required();
  pre->add_option("--out", pre_o.out, "output directory")->required();
  add_config_flags(pre, &pre_o);

  CLI::App* train = app.add_subcommand("train", "train the AU detector");
  train->add_option("--dataset", train_o.dataset, "dataset root")->required();
  train->add_option("--out", train_o.out, "output directory")->required();
  train->add_option("--init", train_o.init_checkpoint,
                    "pretraining checkpoint for encoder warm start");
  add_config_flags(train, &train_o);

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", eval_o.checkpoint, "checkpoint file")->required();
  ev->add_option("--dataset", eval_o.dataset, "dataset root")->required();
  ev->add_option("--out", eval_o.out, "write the JSON report here");
  ev->add_option("--threshold", eval_o.threshold, "decision threshold in (0,1)");

  CLI::App* pred = app.add_subcommand("predict", "export per-frame decisions");
  pred->add_option("--checkpoint", pred_o.checkpoint, "checkpoint file")->required();
  pred->add_option("--dataset", pred_o.dataset, "dataset root")->required();
  pred->add_option("--out", pred_o.out, "output directory")->required();
  pred->add_option("--threshold", pred_o.threshold,
                   "decision threshold in (0,1)");

  std::string synth_out;
  augraph::SyntheticConfig synth_cfg;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", synth_out, "dataset root to create")->required();
  synth->add_option("--videos", synth_cfg.num_videos, "video count");
  synth->add_option("--frames", synth_cfg.frames_per_video, "frames per video");
  synth->add_option("--aus", synth_cfg.num_aus, "AU count (1..16)");
  synth->add_option("--size", synth_cfg.image_size, "square image size");
  synth->add_option("--seed", synth_cfg.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      augraph::RunConfig cfg = resolve_config(pre_o, "pretrain");
      augraph::PretrainOutcome out = augraph::cmd_pretrain(cfg, pre_o.out);
      std::cout << "masked mse " << out.initial_masked_mse << " -> "
                << out.final_masked_mse << "\n"
                << "checkpoint: " << out.checkpoint_path << "\n";
    } else if (train->parsed()) {
      augraph::RunConfig cfg = resolve_config(train_o, "train");
      augraph::TrainOutcome out = augraph::cmd_train(cfg, train_o.out);
      std::cout << out.best_report.to_text() << "checkpoint: "
                << out.checkpoint_path << "\n";
    } else if (ev->parsed()) {
      augraph::MetricReport rep =
          augraph::cmd_eval(eval_o.checkpoint, eval_o.dataset, eval_o.threshold);
      std::cout << rep.to_text();
      if (!eval_o.out.empty()) {
        std::ofstream js(eval_o.out);
        AUG_CHECK(js.good(), "cannot write ", eval_o.out);
        js << rep.to_json() << "\n";
      }
    } else if (pred->parsed()) {
      augraph::cmd_predict(pred_o.checkpoint, pred_o.dataset, pred_o.out,
                           pred_o.threshold);
      std::cout << "predictions written to " << pred_o.out << "\n";
    } else if (synth->parsed()) {
      augraph::generate_synthetic(synth_out, synth_cfg);
      std::cout << "synthetic dataset written to " << synth_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
