#include "augraph/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "augraph/check.hpp"
#include "augraph/checkpoint.hpp"
#include "augraph/logging.hpp"
#include "augraph/optim.hpp"

namespace fs = std::filesystem;

namespace augraph {

namespace {

uint64_t derived_mask_seed(uint64_t base, uint64_t index) {
  return base ^ (0x9E3779B97F4A7C15ULL * (index + 1));
}

// Fixed-mask reconstruction error over every frame in the dataset; used to
// compare training start and end on identical inputs.
double eval_masked_mse(const MaeModel& model, const DataSet& data,
                       double mask_ratio, uint64_t seed_base) {
  NoGradGuard guard;
  const int64_t m = model.config().tokens_per_frame();
  double total = 0.0;
  int64_t count = 0;
  uint64_t image_index = 0;
  for (const auto& video : data.videos) {
    for (int64_t f = 0; f < video.num_frames(); ++f) {
      FrameSequence seq = load_single_frame(video, f, model.config());
      MaskSpec mask = sample_mask(m, mask_ratio,
                                  derived_mask_seed(seed_base, image_index), 1);
      total += model.pretrain_loss(seq, mask).scalar();
      ++count;
      ++image_index;
    }
  }
  AUG_CHECK(count > 0, "dataset has no frames");
  return total / static_cast<double>(count);
}

std::vector<std::vector<double>> snapshot_params(const ParamStore& store) {
  std::vector<std::vector<double>> snap;
  snap.reserve(store.items().size());
  for (const auto& [name, t] : store.items()) snap.push_back(t.values());
  return snap;
}

void restore_params(ParamStore& store, const std::vector<std::vector<double>>& snap) {
  AUG_CHECK(snap.size() == store.items().size(), "snapshot size mismatch");
  size_t i = 0;
  for (const auto& [name, t] : store.items()) {
    Tensor* dst = store.find(name);
    dst->mutable_values() = snap[i++];
  }
}

std::vector<std::string> report_names(const DataSet& data, int num_aus) {
  if (!data.au_names.empty()) return data.au_names;
  return au_names_for(num_aus);
}

nlohmann::json metrics_json(const MetricReport& rep) {
  return nlohmann::json::parse(rep.to_json());
}

}  // namespace

PretrainOutcome cmd_pretrain(const RunConfig& cfg_in, const std::string& out_dir) {
  RunConfig cfg = cfg_in;
  cfg.mode = "pretrain";
  cfg.validate();
  DataSet data = scan_dataset(cfg.dataset_root);
  std::vector<std::pair<int, int64_t>> frames;
  for (size_t v = 0; v < data.videos.size(); ++v)
    for (int64_t f = 0; f < data.videos[v].num_frames(); ++f)
      frames.emplace_back(static_cast<int>(v), f);
  AUG_CHECK(!frames.empty(), "no images under ", cfg.dataset_root);
  AUG_INFO("pretraining on ", frames.size(), " frames for ",
           cfg.optim.total_steps, " steps");

  MaeModel model(cfg.encoder, cfg.seed);
  const int64_t m = cfg.encoder.tokens_per_frame();
  const uint64_t eval_seed = cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL;

  PretrainOutcome out;
  out.initial_masked_mse = eval_masked_mse(model, data, cfg.mask_ratio, eval_seed);
  AUG_INFO("masked mse at step 0: ", out.initial_masked_mse);

  AdamW opt(model.params().items(), cfg.optim);
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_int_distribution<size_t> pick(0, frames.size() - 1);
  for (int step = 0; step < cfg.optim.total_steps; ++step) {
    opt.zero_grad();
    Tensor batch_loss;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& [v, f] = frames[pick(rng)];
      FrameSequence seq = load_single_frame(data.videos[static_cast<size_t>(v)],
                                            f, cfg.encoder);
      MaskSpec mask = sample_mask(m, cfg.mask_ratio, rng(), 1);
      Tensor loss = model.pretrain_loss(seq, mask);
      batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
    }
    batch_loss = scale(batch_loss, 1.0 / cfg.batch_size);
    batch_loss.backward();
    opt.step();
    out.loss_curve.push_back(batch_loss.scalar());
    if (step % 20 == 0 || step + 1 == cfg.optim.total_steps)
      AUG_INFO("step ", step, " loss ", batch_loss.scalar(), " lr ",
               opt.last_lr());
  }

  out.final_masked_mse = eval_masked_mse(model, data, cfg.mask_ratio, eval_seed);
  AUG_INFO("masked mse after training: ", out.final_masked_mse);

  fs::create_directories(out_dir);
  out.checkpoint_path = (fs::path(out_dir) / "pretrain.ckpt").string();
  nlohmann::json metrics = {{"initial_masked_mse", out.initial_masked_mse},
                            {"final_masked_mse", out.final_masked_mse}};
  save_checkpoint(out.checkpoint_path, model.params(), cfg.to_json(),
                  cfg.optim.total_steps, metrics);
  return out;
}

MetricReport evaluate_dataset(const AuDetector& model, const DataSet& data,
                              double threshold) {
  const RunConfig& cfg = model.config();
  ConfusionCounts counts;
  counts.reset(static_cast<size_t>(cfg.num_aus));
  for (size_t v = 0; v < data.videos.size(); ++v) {
    const VideoRecord& video = data.videos[v];
    for (const ClipSpec& spec : segment_for_eval(video, static_cast<int>(v))) {
      LoadedClip clip = load_clip(video, spec, cfg.encoder, cfg.num_aus);
      AUPredictions pred = model.predict(clip.frames, clip.labels);
      counts.accumulate(pred, threshold);
    }
  }
  return counts.report(report_names(data, cfg.num_aus));
}

TrainOutcome cmd_train(const RunConfig& cfg_in, const std::string& out_dir) {
  RunConfig cfg = cfg_in;
  cfg.mode = "train";
  cfg.validate();
  DataSet data = scan_dataset(cfg.dataset_root);
  std::vector<size_t> labeled;
  for (size_t v = 0; v < data.videos.size(); ++v)
    if (data.videos[v].labeled) labeled.push_back(v);
  AUG_CHECK(!labeled.empty(), "no labeled videos under ", cfg.dataset_root);
  AUG_CHECK(data.num_aus() == cfg.num_aus, "dataset has ", data.num_aus(),
            " AU columns, config expects ", cfg.num_aus);

  AuDetector model(cfg);
  if (!cfg.init_checkpoint.empty()) {
    CheckpointData init = load_checkpoint(cfg.init_checkpoint);
    model.load_encoder_from(init);
  }

  AdamW opt(model.params().items(), cfg.optim);
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_int_distribution<size_t> pick(0, labeled.size() - 1);

  TrainOutcome out;
  double best_f1 = -1.0;
  std::vector<std::vector<double>> best_weights;

  auto consider = [&](int step) {
    MetricReport rep = evaluate_dataset(model, data, cfg.threshold);
    AUG_INFO("step ", step, " training-set average F1 ",
             100.0 * rep.average_f1, "%");
    if (rep.average_f1 > best_f1) {
      best_f1 = rep.average_f1;
      out.best_step = step;
      out.best_report = rep;
      best_weights = snapshot_params(model.params());
    }
  };

  consider(0);
  for (int step = 1; step <= cfg.optim.total_steps; ++step) {
    opt.zero_grad();
    Tensor batch_loss;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const size_t vidx = labeled[pick(rng)];
      const VideoRecord& video = data.videos[vidx];
      ClipSpec spec = sample_clip_spec(video, static_cast<int>(vidx), rng);
      LoadedClip clip = load_clip(video, spec, cfg.encoder, cfg.num_aus);
      Tensor scores = model.forward_scores(clip.frames);
      Tensor loss = asymmetric_au_loss(scores, clip.labels,
                                       clip.frames.valid_mask);
      batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
    }
    batch_loss = scale(batch_loss, 1.0 / cfg.batch_size);
    batch_loss.backward();
    opt.step();
    out.loss_curve.push_back(batch_loss.scalar());
    if (step % 20 == 0)
      AUG_INFO("step ", step, " loss ", batch_loss.scalar(), " lr ",
               opt.last_lr());
    if (step % cfg.eval_every == 0 || step == cfg.optim.total_steps) {
      consider(step);
      if (best_f1 >= 1.0) {
        AUG_INFO("perfect training F1 at step ", step, "; stopping early");
        break;
      }
    }
  }

  restore_params(model.params(), best_weights);
  out.best_average_f1 = best_f1;

  fs::create_directories(out_dir);
  out.checkpoint_path = (fs::path(out_dir) / "detector.ckpt").string();
  nlohmann::json metrics = metrics_json(out.best_report);
  metrics["train_average_f1"] = best_f1;
  metrics["best_step"] = out.best_step;
  save_checkpoint(out.checkpoint_path, model.params(), cfg.to_json(),
                  out.best_step, metrics);
  std::ofstream rep_out(fs::path(out_dir) / "train_report.json");
  rep_out << out.best_report.to_json() << "\n";
  AUG_INFO("best training-set average F1 ", 100.0 * best_f1, "% at step ",
           out.best_step);
  return out;
}

AuDetector detector_from_checkpoint(const CheckpointData& data) {
  RunConfig cfg = RunConfig::from_json(data.manifest.at("config"));
  AuDetector model(cfg);
  apply_checkpoint(data, model.params());
  return model;
}

namespace {

double resolve_threshold(const CheckpointData& ckpt, double threshold) {
  if (threshold > 0.0) return threshold;
  return RunConfig::from_json(ckpt.manifest.at("config")).threshold;
}

}  // namespace

MetricReport cmd_eval(const std::string& checkpoint_path,
                      const std::string& dataset_root, double threshold) {
  CheckpointData ckpt = load_checkpoint(checkpoint_path);
  AuDetector model = detector_from_checkpoint(ckpt);
  const double th = resolve_threshold(ckpt, threshold);
  DataSet data = scan_dataset(dataset_root);
  AUG_CHECK_ARG(!data.videos.empty(), "no videos under ", dataset_root);
  for (const auto& video : data.videos)
    AUG_CHECK_ARG(video.labeled, "video ", video.video_id,
                  " has no labels.csv; use the predict subcommand for "
                  "unlabeled data");
  AUG_CHECK_ARG(data.num_aus() == model.config().num_aus, "dataset has ",
                data.num_aus(), " AU columns, checkpoint expects ",
                model.config().num_aus);
  return evaluate_dataset(model, data, th);
}

void cmd_predict(const std::string& checkpoint_path,
                 const std::string& dataset_root, const std::string& out_dir,
                 double threshold) {
  CheckpointData ckpt = load_checkpoint(checkpoint_path);
  AuDetector model = detector_from_checkpoint(ckpt);
  const double th = resolve_threshold(ckpt, threshold);
  const RunConfig& cfg = model.config();
  DataSet data = scan_dataset(dataset_root);
  AUG_CHECK(!data.videos.empty(), "no videos under ", dataset_root);
  fs::create_directories(out_dir);

  const std::vector<std::string> names = au_names_for(cfg.num_aus);
  for (size_t v = 0; v < data.videos.size(); ++v) {
    const VideoRecord& video = data.videos[v];
    std::ofstream csv(fs::path(out_dir) / (video.video_id + ".csv"));
    AUG_CHECK(csv.good(), "cannot write predictions for ", video.video_id);
    csv << "frame";
    for (const auto& n : names) csv << "," << n;
    csv << "\n";
    for (const ClipSpec& spec : segment_for_eval(video, static_cast<int>(v))) {
      LoadedClip clip = load_clip(video, spec, cfg.encoder, cfg.num_aus);
      AUPredictions pred = model.predict(clip.frames, clip.labels);
      for (int64_t t = 0; t < spec.real_frames(); ++t) {
        csv << video.frame_numbers[static_cast<size_t>(spec.start_index + t)];
        for (int64_t i = 0; i < pred.num_aus; ++i)
          csv << "," << (pred.score_at(t, i) >= th ? 1 : 0);
        csv << "\n";
      }
    }
    AUG_DEBUG("wrote predictions for ", video.video_id);
  }
}

}  // namespace augraph
