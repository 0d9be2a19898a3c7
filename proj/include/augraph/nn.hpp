#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "augraph/tensor.hpp"

namespace augraph {

// Named registry of trainable tensors. Registration order is the canonical
// parameter order for optimizers, checkpoints and gradient checks.
class ParamStore {
 public:
  Tensor add(const std::string& name, Tensor t);
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& items() const {
    return items_;
  }
  int64_t scalar_count() const;
  void zero_grad();
  void set_requires_grad(bool flag);
  // Prefix-scoped variant (e.g. freezing just the encoder).
  void set_requires_grad(const std::string& prefix, bool flag);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

// ---- initializers (all draw from the caller's generator in a fixed order) ----
Tensor xavier_uniform(int64_t rows, int64_t cols, std::mt19937_64& rng);
Tensor normal_init(int64_t rows, int64_t cols, double stddev,
                   std::mt19937_64& rng);

// ---- shared transformer pieces ----

struct AttnBlockParams {
  Tensor ln1_g, ln1_b;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_g, ln2_b;
  Tensor w1, b1, w2, b2;  // MLP, hidden = 4*d

  static AttnBlockParams create(int64_t dim, std::mt19937_64& rng);
  void register_params(ParamStore& store, const std::string& prefix);
};

// Multi-head scaled dot-product self-attention over the rows of x [n x d],
// followed by the output projection. Scale is 1/sqrt(d/heads).
Tensor multihead_self_attention(const Tensor& x, const Tensor& wq,
                                const Tensor& bq, const Tensor& wk,
                                const Tensor& bk, const Tensor& wv,
                                const Tensor& bv, const Tensor& wo,
                                const Tensor& bo, int heads);

// Pre-norm block: x + MSA(LN(x)), then + MLP(LN(.)) with GELU.
Tensor vit_block_forward(const Tensor& x, const AttnBlockParams& p, int heads);

// Fixed 2-D sine/cosine positional table for a rows x cols patch grid,
// flattened row-major; dim must be divisible by 4.
std::vector<double> sincos_pos_embed_2d(int grid_rows, int grid_cols, int dim);

}  // namespace augraph
