#pragma once

// Per-AU feature generation, KNN spatial graph + GCN updates, temporal
// transformer, and the similarity-based prediction head.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "augraph/encoder.hpp"
#include "augraph/nn.hpp"
#include "augraph/tensor.hpp"

namespace augraph {

// Canonical AU ordering used everywhere (labels CSV columns, reports,
// prediction files).
extern const std::vector<std::string> kCanonicalAuNames;
std::vector<std::string> au_names_for(int n);

// Per-AU, per-frame node vectors: one [T x d] tensor per AU.
struct AUNodeFeatures {
  std::vector<Tensor> per_au;
  std::vector<std::string> au_names;

  int64_t num_aus() const { return static_cast<int64_t>(per_au.size()); }
  int64_t num_frames() const { return per_au.empty() ? 0 : per_au[0].rows(); }
  int64_t dim() const { return per_au.empty() ? 0 : per_au[0].cols(); }
};

// Per-frame binary KNN adjacency; rows have out-degree exactly k, zero
// diagonal, and may be asymmetric.
struct AUGraphTopology {
  int64_t num_frames = 0;
  int64_t n = 0;
  int k = 0;
  std::vector<uint8_t> adjacency;  // [t][i][j]

  bool edge(int64_t t, int64_t i, int64_t j) const {
    return adjacency[static_cast<size_t>((t * n + i) * n + j)] != 0;
  }
  int64_t out_degree(int64_t t, int64_t i) const {
    int64_t deg = 0;
    for (int64_t j = 0; j < n; ++j) deg += edge(t, i, j) ? 1 : 0;
    return deg;
  }
};

struct STGLConfig {
  int num_blocks = 3;
  int k = 4;
  int heads = 1;
  bool use_spatial = true;
  bool use_temporal = true;
  bool dynamic_graph = true;       // rebuild KNN from current features per block
  bool temporal_positional = false;
  bool cosine_similarity = false;  // KNN similarity; default raw dot product

  void validate(int64_t n, int64_t d) const;
};

struct AfgParams {
  std::vector<Tensor> w;  // one [d x d] per AU branch
  std::vector<Tensor> b;  // one [1 x d] per AU branch

  static AfgParams create(int64_t n, int64_t d, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);
};

struct GcnParams {
  Tensor w_r;  // neighbour transform
  Tensor w_g;  // aggregate transform

  static GcnParams create(int64_t d, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);
};

// Temporal transformer layer written exactly as its update equation: residual
// attention (no pre-attention norm), then Z + FFN(LayerNorm(Z)). Attention
// projections carry no biases.
struct TemporalParams {
  Tensor wq, wk, wv, wo;
  Tensor ln_g, ln_b;
  Tensor f1_w, f1_b, f2_w, f2_b;  // FFN d -> 4d -> d with ReLU

  static TemporalParams create(int64_t d, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);
};

struct StglBlockParams {
  GcnParams gcn;
  TemporalParams temporal;
};

struct StglParams {
  std::vector<StglBlockParams> blocks;
  Tensor temporal_pos;  // [max_frames x d], only used when temporal_positional

  static StglParams create(const STGLConfig& cfg, int64_t d, int64_t max_frames,
                           std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix,
                       const STGLConfig& cfg);
};

struct SCHeadParams {
  Tensor anchors;  // [n x d], one trainable anchor per AU

  static SCHeadParams create(int64_t n, int64_t d, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);
};

// ---- operations ----

// N parallel linear branches over the shared tokens, then mean over the m
// patch positions of each frame.
AUNodeFeatures afg_forward(const PatchTokenSequence& tokens,
                           const AfgParams& params);

// Per frame, each node connects to its k most similar other nodes; ties break
// toward the lower AU index. Deterministic.
AUGraphTopology build_knn_graph(const AUNodeFeatures& nodes, int k,
                                bool cosine = false);

// v_i <- ReLU(v_i + W_g * mean over the k neighbours of (W_r v_j)),
// independently per frame; adjacency is a non-differentiated constant.
AUNodeFeatures gcn_update(const AUNodeFeatures& nodes,
                          const AUGraphTopology& topo, const GcnParams& params);

AUNodeFeatures temporal_attention_update(const AUNodeFeatures& nodes,
                                         const TemporalParams& params,
                                         const STGLConfig& cfg,
                                         const Tensor& temporal_pos = Tensor());

// Stacked blocks: (KNN + GCN) if use_spatial, then the temporal layer if
// use_temporal. With dynamic_graph the KNN graph is rebuilt per block from the
// current features; otherwise the graph built from the input features is
// reused. topo_log, when given, receives every topology built.
AUNodeFeatures stgl_forward(const AUNodeFeatures& nodes, const STGLConfig& cfg,
                            const StglParams& params,
                            std::vector<AUGraphTopology>* topo_log = nullptr);

// Cosine similarity between ReLU-activated node features and ReLU-activated
// anchors; scores in [0,1], shape [T x N].
Tensor sc_predict(const AUNodeFeatures& nodes, const SCHeadParams& head);

inline constexpr double kScEpsilon = 1e-8;

}  // namespace augraph
