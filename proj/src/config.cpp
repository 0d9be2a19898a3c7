#include "augraph/config.hpp"

#include "augraph/check.hpp"
#include "augraph/data.hpp"

namespace augraph {

void RunConfig::validate() const {
  encoder.validate();
  AUG_CHECK_ARG(num_aus >= 1, "num_aus must be positive");
  AUG_CHECK_ARG(clip_length == kClipLength, "clip_length is fixed at ",
                kClipLength, ", got ", clip_length);
  AUG_CHECK_ARG(mask_ratio > 0.0 && mask_ratio < 1.0,
                "mask_ratio must lie in (0,1)");
  AUG_CHECK_ARG(optim.lr > 0.0, "lr must be positive");
  AUG_CHECK_ARG(optim.weight_decay >= 0.0, "weight_decay must be >= 0");
  AUG_CHECK_ARG(optim.total_steps >= 0, "total_steps must be >= 0");
  AUG_CHECK_ARG(optim.warmup_steps >= 0, "warmup_steps must be >= 0");
  AUG_CHECK_ARG(batch_size >= 1, "batch_size must be positive");
  AUG_CHECK_ARG(threshold > 0.0 && threshold < 1.0,
                "threshold must lie in (0,1)");
  AUG_CHECK_ARG(eval_every >= 1, "eval_every must be positive");
  if (use_stgl) stgl.validate(num_aus, encoder.embed_dim);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["encoder"] = {{"image_h", encoder.image_h},
                  {"image_w", encoder.image_w},
                  {"channels", encoder.channels},
                  {"patch_size", encoder.patch_size},
                  {"embed_dim", encoder.embed_dim},
                  {"encoder_depth", encoder.encoder_depth},
                  {"decoder_depth", encoder.decoder_depth},
                  {"num_heads", encoder.num_heads}};
  j["stgl"] = {{"num_blocks", stgl.num_blocks},
               {"k", stgl.k},
               {"heads", stgl.heads},
               {"use_spatial", stgl.use_spatial},
               {"use_temporal", stgl.use_temporal},
               {"dynamic_graph", stgl.dynamic_graph},
               {"temporal_positional", stgl.temporal_positional},
               {"cosine_similarity", stgl.cosine_similarity}};
  j["use_stgl"] = use_stgl;
  j["num_aus"] = num_aus;
  j["clip_length"] = clip_length;
  j["mask_ratio"] = mask_ratio;
  j["optim"] = {{"lr", optim.lr},
                {"beta1", optim.beta1},
                {"beta2", optim.beta2},
                {"eps", optim.eps},
                {"weight_decay", optim.weight_decay},
                {"warmup_steps", optim.warmup_steps},
                {"total_steps", optim.total_steps}};
  j["batch_size"] = batch_size;
  j["threshold"] = threshold;
  j["seed"] = seed;
  j["freeze_encoder"] = freeze_encoder;
  j["eval_every"] = eval_every;
  j["dataset_root"] = dataset_root;
  j["init_checkpoint"] = init_checkpoint;
  j["mode"] = mode;
  return j;
}

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  return apply_json(RunConfig(), j);
}

RunConfig RunConfig::apply_json(RunConfig base, const nlohmann::json& j) {
  RunConfig cfg = std::move(base);
  if (j.contains("preset")) cfg = preset_config(j.at("preset").get<std::string>());
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    maybe(e, "image_h", &cfg.encoder.image_h);
    maybe(e, "image_w", &cfg.encoder.image_w);
    maybe(e, "channels", &cfg.encoder.channels);
    maybe(e, "patch_size", &cfg.encoder.patch_size);
    maybe(e, "embed_dim", &cfg.encoder.embed_dim);
    maybe(e, "encoder_depth", &cfg.encoder.encoder_depth);
    maybe(e, "decoder_depth", &cfg.encoder.decoder_depth);
    maybe(e, "num_heads", &cfg.encoder.num_heads);
  }
  if (j.contains("stgl")) {
    const auto& s = j.at("stgl");
    maybe(s, "num_blocks", &cfg.stgl.num_blocks);
    maybe(s, "k", &cfg.stgl.k);
    maybe(s, "heads", &cfg.stgl.heads);
    maybe(s, "use_spatial", &cfg.stgl.use_spatial);
    maybe(s, "use_temporal", &cfg.stgl.use_temporal);
    maybe(s, "dynamic_graph", &cfg.stgl.dynamic_graph);
    maybe(s, "temporal_positional", &cfg.stgl.temporal_positional);
    maybe(s, "cosine_similarity", &cfg.stgl.cosine_similarity);
  }
  maybe(j, "use_stgl", &cfg.use_stgl);
  maybe(j, "num_aus", &cfg.num_aus);
  maybe(j, "clip_length", &cfg.clip_length);
  maybe(j, "mask_ratio", &cfg.mask_ratio);
  if (j.contains("optim")) {
    const auto& o = j.at("optim");
    maybe(o, "lr", &cfg.optim.lr);
    maybe(o, "beta1", &cfg.optim.beta1);
    maybe(o, "beta2", &cfg.optim.beta2);
    maybe(o, "eps", &cfg.optim.eps);
    maybe(o, "weight_decay", &cfg.optim.weight_decay);
    maybe(o, "warmup_steps", &cfg.optim.warmup_steps);
    maybe(o, "total_steps", &cfg.optim.total_steps);
  }
  maybe(j, "batch_size", &cfg.batch_size);
  maybe(j, "threshold", &cfg.threshold);
  maybe(j, "seed", &cfg.seed);
  maybe(j, "freeze_encoder", &cfg.freeze_encoder);
  maybe(j, "eval_every", &cfg.eval_every);
  maybe(j, "dataset_root", &cfg.dataset_root);
  maybe(j, "init_checkpoint", &cfg.init_checkpoint);
  maybe(j, "mode", &cfg.mode);
  return cfg;
}

RunConfig RunConfig::desk_preset() {
  RunConfig cfg;
  cfg.encoder.image_h = 64;
  cfg.encoder.image_w = 64;
  cfg.encoder.patch_size = 16;
  cfg.encoder.embed_dim = 64;
  cfg.encoder.encoder_depth = 4;
  cfg.encoder.decoder_depth = 2;
  cfg.encoder.num_heads = 4;
  cfg.stgl.num_blocks = 3;
  cfg.stgl.k = 4;
  cfg.stgl.heads = 1;
  cfg.num_aus = 12;
  cfg.batch_size = 4;
  // The published schedule (lr 1e-4) is tuned for long training on the real
  // corpus; a 500-step desk run needs a hotter peak to converge, so the desk
  // preset raises it. The paper preset keeps the published value.
  cfg.optim.lr = 5e-4;
  cfg.optim.weight_decay = 5e-4;
  cfg.optim.warmup_steps = 20;
  cfg.optim.total_steps = 500;
  return cfg;
}

RunConfig RunConfig::desk_pretrain_preset() {
  RunConfig cfg = desk_preset();
  cfg.batch_size = 16;
  cfg.optim.lr = 1.5e-4;
  cfg.optim.weight_decay = 0.05;
  cfg.optim.warmup_steps = 10;
  cfg.optim.total_steps = 200;
  cfg.mask_ratio = 0.75;
  return cfg;
}

RunConfig RunConfig::paper_preset() {
  RunConfig cfg;
  cfg.encoder.image_h = 256;
  cfg.encoder.image_w = 256;
  cfg.encoder.patch_size = 16;   // not stated in the source
  cfg.encoder.embed_dim = 768;   // not stated in the source
  cfg.encoder.encoder_depth = 12;
  cfg.encoder.decoder_depth = 4;
  cfg.encoder.num_heads = 12;
  cfg.stgl.num_blocks = 3;
  cfg.stgl.k = 4;
  cfg.stgl.heads = 1;
  cfg.num_aus = 12;
  cfg.batch_size = 16;
  cfg.optim.lr = 1e-4;
  cfg.optim.weight_decay = 5e-4;
  cfg.optim.warmup_steps = 500;
  cfg.optim.total_steps = 100000;
  return cfg;
}

RunConfig preset_config(const std::string& name) {
  if (name == "desk") return RunConfig::desk_preset();
  if (name == "desk-pretrain") return RunConfig::desk_pretrain_preset();
  if (name == "paper") return RunConfig::paper_preset();
  throw ConfigError("unknown preset '" + name +
                    "' (expected desk, desk-pretrain or paper)");
}

}  // namespace augraph
