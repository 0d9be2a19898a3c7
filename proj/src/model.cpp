#include "augraph/model.hpp"

#include "augraph/check.hpp"
#include "augraph/logging.hpp"

namespace augraph {

AuDetector::AuDetector(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  enc_ = EncoderCore::create(cfg_.encoder, rng);
  enc_.register_params(params_, "encoder");
  afg_ = AfgParams::create(cfg_.num_aus, cfg_.encoder.embed_dim, rng);
  afg_.register_params(params_, "afg");
  if (cfg_.use_stgl) {
    stgl_ = StglParams::create(cfg_.stgl, cfg_.encoder.embed_dim,
                               cfg_.clip_length, rng);
    stgl_.register_params(params_, "stgl", cfg_.stgl);
  }
  sc_ = SCHeadParams::create(cfg_.num_aus, cfg_.encoder.embed_dim, rng);
  sc_.register_params(params_, "sc");
  if (cfg_.freeze_encoder) set_encoder_frozen(true);
  AUG_DEBUG("detector holds ", params_.scalar_count(), " parameters");
}

Tensor AuDetector::forward_scores(const FrameSequence& seq,
                                  std::vector<AUGraphTopology>* topo_log) const {
  PatchTokenSequence tokens = enc_.encode(seq);
  AUNodeFeatures nodes = afg_forward(tokens, afg_);
  if (cfg_.use_stgl)
    nodes = stgl_forward(nodes, cfg_.stgl, stgl_, topo_log);
  return sc_predict(nodes, sc_);
}

AUPredictions AuDetector::predict(const FrameSequence& seq,
                                  const std::vector<int>& labels) const {
  NoGradGuard guard;
  Tensor scores = forward_scores(seq);
  AUPredictions pred;
  pred.num_frames = scores.rows();
  pred.num_aus = scores.cols();
  pred.scores = scores.values();
  pred.labels = labels;
  pred.frame_valid = seq.valid_mask;
  pred.au_names = au_names_for(cfg_.num_aus);
  pred.validate();
  return pred;
}

void AuDetector::load_encoder_from(const CheckpointData& data) {
  int expected = 0;
  for (const auto& [name, t] : params_.items())
    if (name.rfind("encoder.", 0) == 0) ++expected;
  const int copied = apply_checkpoint_prefix(data, params_, "encoder.", "encoder.");
  AUG_CHECK(copied == expected, "encoder warm start copied ", copied, " of ",
            expected, " tensors; the checkpoint was built for a different "
            "encoder shape");
  AUG_INFO("initialized ", copied, " encoder tensors from checkpoint");
}

void AuDetector::set_encoder_frozen(bool frozen) {
  params_.set_requires_grad("encoder", !frozen);
  cfg_.freeze_encoder = frozen;
}

}  // namespace augraph
