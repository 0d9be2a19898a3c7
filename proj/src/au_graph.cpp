#include "augraph/au_graph.hpp"

#include <algorithm>
#include <cmath>

namespace augraph {

const std::vector<std::string> kCanonicalAuNames = {
    "AU1",  "AU2",  "AU4",  "AU6",  "AU7",  "AU10",
    "AU12", "AU15", "AU23", "AU24", "AU25", "AU26"};

std::vector<std::string> au_names_for(int n) {
  AUG_CHECK_ARG(n >= 1, "need at least one AU");
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i < static_cast<int>(kCanonicalAuNames.size()))
      names.push_back(kCanonicalAuNames[static_cast<size_t>(i)]);
    else
      names.push_back("AU" + std::to_string(100 + i));
  }
  return names;
}

void STGLConfig::validate(int64_t n, int64_t d) const {
  AUG_CHECK_ARG(num_blocks >= 1, "stgl: num_blocks must be >= 1");
  AUG_CHECK_ARG(k >= 1 && k <= n - 1, "stgl: k = ", k, " must lie in [1, ",
                n - 1, "]");
  AUG_CHECK_ARG(heads >= 1 && d % heads == 0, "stgl: dim ", d,
                " not divisible by ", heads, " heads");
  AUG_CHECK_ARG(use_spatial || use_temporal,
                "stgl: both spatial and temporal branches disabled; "
                "the block would be a no-op");
}

AfgParams AfgParams::create(int64_t n, int64_t d, std::mt19937_64& rng) {
  AfgParams p;
  p.w.reserve(static_cast<size_t>(n));
  p.b.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    p.w.push_back(xavier_uniform(d, d, rng));
    p.b.push_back(Tensor::zeros(1, d));
  }
  return p;
}

void AfgParams::register_params(ParamStore& store, const std::string& prefix) {
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = store.add(prefix + ".branch" + std::to_string(i) + ".w", w[i]);
    b[i] = store.add(prefix + ".branch" + std::to_string(i) + ".b", b[i]);
  }
}

GcnParams GcnParams::create(int64_t d, std::mt19937_64& rng) {
  GcnParams p;
  p.w_r = xavier_uniform(d, d, rng);
  // The aggregation projection sits on a residual path; a small init keeps
  // each graph layer close to the identity at the start of training.
  p.w_g = normal_init(d, d, 0.02, rng);
  return p;
}

void GcnParams::register_params(ParamStore& store, const std::string& prefix) {
  w_r = store.add(prefix + ".w_r", w_r);
  w_g = store.add(prefix + ".w_g", w_g);
}

TemporalParams TemporalParams::create(int64_t d, std::mt19937_64& rng) {
  TemporalParams p;
  p.wq = xavier_uniform(d, d, rng);
  p.wk = xavier_uniform(d, d, rng);
  p.wv = xavier_uniform(d, d, rng);
  p.wo = xavier_uniform(d, d, rng);
  p.ln_g = Tensor::full(1, d, 1.0);
  p.ln_b = Tensor::zeros(1, d);
  p.f1_w = xavier_uniform(d, 4 * d, rng);
  p.f1_b = Tensor::zeros(1, 4 * d);
  p.f2_w = xavier_uniform(4 * d, d, rng);
  p.f2_b = Tensor::zeros(1, d);
  return p;
}

void TemporalParams::register_params(ParamStore& store,
                                     const std::string& prefix) {
  wq = store.add(prefix + ".wq", wq);
  wk = store.add(prefix + ".wk", wk);
  wv = store.add(prefix + ".wv", wv);
  wo = store.add(prefix + ".wo", wo);
  ln_g = store.add(prefix + ".ln.g", ln_g);
  ln_b = store.add(prefix + ".ln.b", ln_b);
  f1_w = store.add(prefix + ".ffn.w1", f1_w);
  f1_b = store.add(prefix + ".ffn.b1", f1_b);
  f2_w = store.add(prefix + ".ffn.w2", f2_w);
  f2_b = store.add(prefix + ".ffn.b2", f2_b);
}

StglParams StglParams::create(const STGLConfig& cfg, int64_t d,
                              int64_t max_frames, std::mt19937_64& rng) {
  StglParams p;
  p.blocks.reserve(static_cast<size_t>(cfg.num_blocks));
  for (int i = 0; i < cfg.num_blocks; ++i) {
    StglBlockParams blk;
    blk.gcn = GcnParams::create(d, rng);
    blk.temporal = TemporalParams::create(d, rng);
    p.blocks.push_back(std::move(blk));
  }
  if (cfg.temporal_positional)
    p.temporal_pos = normal_init(max_frames, d, 0.02, rng);
  return p;
}

void StglParams::register_params(ParamStore& store, const std::string& prefix,
                                 const STGLConfig& cfg) {
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string bp = prefix + ".block" + std::to_string(i);
    blocks[i].gcn.register_params(store, bp + ".gcn");
    blocks[i].temporal.register_params(store, bp + ".temporal");
  }
  if (cfg.temporal_positional && temporal_pos.defined())
    temporal_pos = store.add(prefix + ".temporal_pos", temporal_pos);
}

SCHeadParams SCHeadParams::create(int64_t n, int64_t d, std::mt19937_64& rng) {
  SCHeadParams p;
  // The similarity head rectifies the anchors, so a dimension initialized
  // negative contributes nothing and receives no gradient. Start every
  // dimension positive to keep the whole anchor trainable.
  Tensor a = xavier_uniform(n, d, rng);
  std::vector<double>& v = a.mutable_values();
  for (double& x : v) x = std::abs(x);
  p.anchors = a;
  return p;
}

void SCHeadParams::register_params(ParamStore& store,
                                   const std::string& prefix) {
  anchors = store.add(prefix + ".anchors", anchors);
}

AUNodeFeatures afg_forward(const PatchTokenSequence& tokens,
                           const AfgParams& params) {
  AUG_CHECK(!tokens.frames.empty(), "afg: empty token sequence");
  const int64_t m = tokens.frames[0].rows();
  for (const auto& f : tokens.frames)
    AUG_CHECK(f.rows() == m, "afg: expects full (unmasked) token sets");

  Tensor all = concat_rows(tokens.frames);  // [(T*m) x d]
  AUNodeFeatures out;
  out.au_names = au_names_for(static_cast<int>(params.w.size()));
  out.per_au.reserve(params.w.size());
  for (size_t i = 0; i < params.w.size(); ++i) {
    Tensor u = add_rowvec(matmul(all, params.w[i]), params.b[i]);
    out.per_au.push_back(group_row_mean(u, m));  // [T x d]
  }
  return out;
}

AUGraphTopology build_knn_graph(const AUNodeFeatures& nodes, int k,
                                bool cosine) {
  const int64_t n = nodes.num_aus();
  const int64_t t_frames = nodes.num_frames();
  const int64_t d = nodes.dim();
  AUG_CHECK_ARG(k >= 1 && k <= n - 1, "knn: k = ", k, " must lie in [1, ",
                n - 1, "]");

  AUGraphTopology topo;
  topo.num_frames = t_frames;
  topo.n = n;
  topo.k = k;
  topo.adjacency.assign(static_cast<size_t>(t_frames * n * n), 0);

  std::vector<std::pair<double, int64_t>> cand;
  cand.reserve(static_cast<size_t>(n - 1));
  for (int64_t t = 0; t < t_frames; ++t) {
    for (int64_t i = 0; i < n; ++i) {
      const double* vi = nodes.per_au[static_cast<size_t>(i)].values().data() + t * d;
      cand.clear();
      for (int64_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* vj =
            nodes.per_au[static_cast<size_t>(j)].values().data() + t * d;
        double dot = 0.0;
        for (int64_t c = 0; c < d; ++c) dot += vi[c] * vj[c];
        if (cosine) {
          double ni = 0.0, nj = 0.0;
          for (int64_t c = 0; c < d; ++c) {
            ni += vi[c] * vi[c];
            nj += vj[c] * vj[c];
          }
          dot /= (std::sqrt(ni) * std::sqrt(nj) + 1e-12);
        }
        cand.emplace_back(dot, j);
      }
      // Highest similarity first; exact ties go to the lower AU index.
      std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (int64_t r = 0; r < k; ++r)
        topo.adjacency[static_cast<size_t>((t * n + i) * n + cand[static_cast<size_t>(r)].second)] = 1;
    }
  }
  return topo;
}

AUNodeFeatures gcn_update(const AUNodeFeatures& nodes,
                          const AUGraphTopology& topo, const GcnParams& params) {
  const int64_t n = nodes.num_aus();
  const int64_t t_frames = nodes.num_frames();
  AUG_CHECK(topo.n == n && topo.num_frames == t_frames,
            "gcn: topology built over different (N,T)");

  // Per-AU row picks for frame t, then per-frame [N x d] node matrix.
  std::vector<std::vector<Tensor>> frame_rows(
      static_cast<size_t>(t_frames));
  const double inv_k = 1.0 / static_cast<double>(topo.k);
  std::vector<Tensor> updated_frames(static_cast<size_t>(t_frames));
  for (int64_t t = 0; t < t_frames; ++t) {
    std::vector<Tensor> rows;
    rows.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
      rows.push_back(row(nodes.per_au[static_cast<size_t>(i)], t));
    Tensor v = concat_rows(rows);  // [N x d]

    std::vector<double> mix(static_cast<size_t>(n * n), 0.0);
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < n; ++j)
        if (topo.edge(t, i, j)) mix[static_cast<size_t>(i * n + j)] = inv_k;

    Tensor neighbour = matmul(v, params.w_r);
    Tensor aggregate = left_const_matmul(mix, n, neighbour);
    Tensor out = relu(add(v, matmul(aggregate, params.w_g)));
    updated_frames[static_cast<size_t>(t)] = out;
  }

  AUNodeFeatures out;
  out.au_names = nodes.au_names;
  out.per_au.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    std::vector<Tensor> au_rows;
    au_rows.reserve(static_cast<size_t>(t_frames));
    for (int64_t t = 0; t < t_frames; ++t)
      au_rows.push_back(row(updated_frames[static_cast<size_t>(t)], i));
    out.per_au.push_back(concat_rows(au_rows));
  }
  return out;
}

AUNodeFeatures temporal_attention_update(const AUNodeFeatures& nodes,
                                         const TemporalParams& params,
                                         const STGLConfig& cfg,
                                         const Tensor& temporal_pos) {
  const int64_t t_frames = nodes.num_frames();
  AUNodeFeatures out;
  out.au_names = nodes.au_names;
  out.per_au.reserve(nodes.per_au.size());
  for (const auto& v_in : nodes.per_au) {
    Tensor v = v_in;
    if (cfg.temporal_positional) {
      AUG_CHECK(temporal_pos.defined() && temporal_pos.rows() >= t_frames,
                "temporal positional table too short for ", t_frames,
                " frames");
      v = add(v, gather_rows(temporal_pos, [&] {
                std::vector<int64_t> idx(static_cast<size_t>(t_frames));
                for (int64_t i = 0; i < t_frames; ++i) idx[static_cast<size_t>(i)] = i;
                return idx;
              }()));
    }
    Tensor att = multihead_self_attention(v, params.wq, Tensor(), params.wk,
                                          Tensor(), params.wv, Tensor(),
                                          params.wo, Tensor(), cfg.heads);
    Tensor z = add(v, att);
    Tensor h = layer_norm_rows(z, params.ln_g, params.ln_b);
    Tensor ffn = add_rowvec(
        matmul(relu(add_rowvec(matmul(h, params.f1_w), params.f1_b)), params.f2_w),
        params.f2_b);
    out.per_au.push_back(add(z, ffn));
  }
  return out;
}

AUNodeFeatures stgl_forward(const AUNodeFeatures& nodes, const STGLConfig& cfg,
                            const StglParams& params,
                            std::vector<AUGraphTopology>* topo_log) {
  cfg.validate(nodes.num_aus(), nodes.dim());
  AUG_CHECK(params.blocks.size() == static_cast<size_t>(cfg.num_blocks),
            "stgl: parameter blocks ", params.blocks.size(), " != num_blocks ",
            cfg.num_blocks);

  AUNodeFeatures current = nodes;
  AUGraphTopology static_topo;
  if (cfg.use_spatial && !cfg.dynamic_graph) {
    static_topo = build_knn_graph(nodes, cfg.k, cfg.cosine_similarity);
    if (topo_log != nullptr) topo_log->push_back(static_topo);
  }
  for (const auto& blk : params.blocks) {
    if (cfg.use_spatial) {
      if (cfg.dynamic_graph) {
        AUGraphTopology topo = build_knn_graph(current, cfg.k, cfg.cosine_similarity);
        if (topo_log != nullptr) topo_log->push_back(topo);
        current = gcn_update(current, topo, blk.gcn);
      } else {
        current = gcn_update(current, static_topo, blk.gcn);
      }
    }
    if (cfg.use_temporal)
      current = temporal_attention_update(current, blk.temporal, cfg,
                                          params.temporal_pos);
  }
  return current;
}

Tensor sc_predict(const AUNodeFeatures& nodes, const SCHeadParams& head) {
  const int64_t n = nodes.num_aus();
  const int64_t t_frames = nodes.num_frames();
  AUG_CHECK(head.anchors.rows() == n && head.anchors.cols() == nodes.dim(),
            "sc_predict: anchors are [", head.anchors.rows(), "x",
            head.anchors.cols(), "], expected [", n, "x", nodes.dim(), "]");

  std::vector<Tensor> au_columns;
  au_columns.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    Tensor va = relu(nodes.per_au[static_cast<size_t>(i)]);   // [T x d]
    Tensor sa = relu(row(head.anchors, i));                   // [1 x d]
    Tensor anchor_norm = sqrt(sum_all(mul(sa, sa)));          // [1 x 1]
    std::vector<Tensor> scores;
    scores.reserve(static_cast<size_t>(t_frames));
    for (int64_t t = 0; t < t_frames; ++t) {
      Tensor vt = row(va, t);
      Tensor num = matmul(vt, transpose(sa));
      Tensor vnorm = sqrt(sum_all(mul(vt, vt)));
      Tensor den = add_scalar(mul(vnorm, anchor_norm), kScEpsilon);
      scores.push_back(divide(num, den));
    }
    au_columns.push_back(concat_rows(scores));  // [T x 1]
  }
  return concat_cols(au_columns);  // [T x N]
}

}  // namespace augraph
