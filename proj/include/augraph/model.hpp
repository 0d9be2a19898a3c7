#pragma once

#include <vector>

#include "augraph/au_graph.hpp"
#include "augraph/checkpoint.hpp"
#include "augraph/config.hpp"
#include "augraph/encoder.hpp"
#include "augraph/objectives.hpp"

namespace augraph {

// Full detection pipeline: patch encoder -> per-AU feature branches ->
// spatio-temporal graph blocks (optional) -> similarity scores.
class AuDetector {
 public:
  explicit AuDetector(const RunConfig& cfg);

  // Differentiable scores for one clip, [T x N] in [0,1]. Topologies used by
  // the graph blocks are appended to topo_log when it is given.
  Tensor forward_scores(const FrameSequence& seq,
                        std::vector<AUGraphTopology>* topo_log = nullptr) const;

  // No-grad forward packaged with labels for scoring.
  AUPredictions predict(const FrameSequence& seq,
                        const std::vector<int>& labels) const;

  // Copies encoder weights out of a pretraining checkpoint.
  void load_encoder_from(const CheckpointData& data);
  void set_encoder_frozen(bool frozen);

  const RunConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  RunConfig cfg_;
  EncoderCore enc_;
  AfgParams afg_;
  StglParams stgl_;
  SCHeadParams sc_;
  ParamStore params_;
};

}  // namespace augraph
