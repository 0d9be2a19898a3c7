#include "augraph/nn.hpp"

#include <cmath>

namespace augraph {

Tensor ParamStore::add(const std::string& name, Tensor t) {
  AUG_CHECK(find(name) == nullptr, "param '", name, "' registered twice");
  t.set_requires_grad(true);
  items_.emplace_back(name, t);
  return t;
}

Tensor* ParamStore::find(const std::string& name) {
  for (auto& [n, t] : items_)
    if (n == name) return &t;
  return nullptr;
}

const Tensor* ParamStore::find(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return &t;
  return nullptr;
}

int64_t ParamStore::scalar_count() const {
  int64_t total = 0;
  for (const auto& [n, t] : items_) total += t.size();
  return total;
}

void ParamStore::zero_grad() {
  for (auto& [n, t] : items_) t.zero_grad();
}

void ParamStore::set_requires_grad(bool flag) {
  for (auto& [n, t] : items_) t.set_requires_grad(flag);
}

void ParamStore::set_requires_grad(const std::string& prefix, bool flag) {
  for (auto& [n, t] : items_)
    if (n.rfind(prefix, 0) == 0) t.set_requires_grad(flag);
}

Tensor xavier_uniform(int64_t rows, int64_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(static_cast<size_t>(rows * cols));
  for (double& x : v) x = dist(rng);
  return Tensor::from_values(rows, cols, std::move(v));
}

Tensor normal_init(int64_t rows, int64_t cols, double stddev,
                   std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(static_cast<size_t>(rows * cols));
  for (double& x : v) x = dist(rng);
  return Tensor::from_values(rows, cols, std::move(v));
}

AttnBlockParams AttnBlockParams::create(int64_t dim, std::mt19937_64& rng) {
  // Transformer linears follow the ViT convention of small normal init;
  // residual branches then start near the identity map, which keeps deep
  // stacks well conditioned for short fine-tuning budgets.
  AttnBlockParams p;
  p.ln1_g = Tensor::full(1, dim, 1.0);
  p.ln1_b = Tensor::zeros(1, dim);
  p.wq = normal_init(dim, dim, 0.02, rng);
  p.bq = Tensor::zeros(1, dim);
  p.wk = normal_init(dim, dim, 0.02, rng);
  p.bk = Tensor::zeros(1, dim);
  p.wv = normal_init(dim, dim, 0.02, rng);
  p.bv = Tensor::zeros(1, dim);
  p.wo = normal_init(dim, dim, 0.02, rng);
  p.bo = Tensor::zeros(1, dim);
  p.ln2_g = Tensor::full(1, dim, 1.0);
  p.ln2_b = Tensor::zeros(1, dim);
  p.w1 = normal_init(dim, 4 * dim, 0.02, rng);
  p.b1 = Tensor::zeros(1, 4 * dim);
  p.w2 = normal_init(4 * dim, dim, 0.02, rng);
  p.b2 = Tensor::zeros(1, dim);
  return p;
}

void AttnBlockParams::register_params(ParamStore& store,
                                      const std::string& prefix) {
  ln1_g = store.add(prefix + ".ln1.g", ln1_g);
  ln1_b = store.add(prefix + ".ln1.b", ln1_b);
  wq = store.add(prefix + ".attn.wq", wq);
  bq = store.add(prefix + ".attn.bq", bq);
  wk = store.add(prefix + ".attn.wk", wk);
  bk = store.add(prefix + ".attn.bk", bk);
  wv = store.add(prefix + ".attn.wv", wv);
  bv = store.add(prefix + ".attn.bv", bv);
  wo = store.add(prefix + ".attn.wo", wo);
  bo = store.add(prefix + ".attn.bo", bo);
  ln2_g = store.add(prefix + ".ln2.g", ln2_g);
  ln2_b = store.add(prefix + ".ln2.b", ln2_b);
  w1 = store.add(prefix + ".mlp.w1", w1);
  b1 = store.add(prefix + ".mlp.b1", b1);
  w2 = store.add(prefix + ".mlp.w2", w2);
  b2 = store.add(prefix + ".mlp.b2", b2);
}

Tensor multihead_self_attention(const Tensor& x, const Tensor& wq,
                                const Tensor& bq, const Tensor& wk,
                                const Tensor& bk, const Tensor& wv,
                                const Tensor& bv, const Tensor& wo,
                                const Tensor& bo, int heads) {
  const int64_t d = x.cols();
  AUG_CHECK_ARG(heads >= 1 && d % heads == 0, "attention: dim ", d,
                " not divisible by ", heads, " heads");
  const int64_t dh = d / heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor q = bq.defined() ? add_rowvec(matmul(x, wq), bq) : matmul(x, wq);
  Tensor k = bk.defined() ? add_rowvec(matmul(x, wk), bk) : matmul(x, wk);
  Tensor v = bv.defined() ? add_rowvec(matmul(x, wv), bv) : matmul(x, wv);

  std::vector<Tensor> head_outs;
  head_outs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const int64_t c0 = h * dh;
    Tensor qh = heads == 1 ? q : slice_cols(q, c0, c0 + dh);
    Tensor kh = heads == 1 ? k : slice_cols(k, c0, c0 + dh);
    Tensor vh = heads == 1 ? v : slice_cols(v, c0, c0 + dh);
    Tensor logits = scale(matmul(qh, transpose(kh)), att_scale);
    Tensor weights = softmax_rows(logits);
    head_outs.push_back(matmul(weights, vh));
  }
  Tensor merged = heads == 1 ? head_outs[0] : concat_cols(head_outs);
  Tensor out = matmul(merged, wo);
  return bo.defined() ? add_rowvec(out, bo) : out;
}

Tensor vit_block_forward(const Tensor& x, const AttnBlockParams& p, int heads) {
  Tensor h = layer_norm_rows(x, p.ln1_g, p.ln1_b);
  Tensor attn = multihead_self_attention(h, p.wq, p.bq, p.wk, p.bk, p.wv, p.bv,
                                         p.wo, p.bo, heads);
  Tensor z = add(x, attn);
  Tensor h2 = layer_norm_rows(z, p.ln2_g, p.ln2_b);
  Tensor mlp = add_rowvec(matmul(gelu(add_rowvec(matmul(h2, p.w1), p.b1)), p.w2),
                          p.b2);
  return add(z, mlp);
}

std::vector<double> sincos_pos_embed_2d(int grid_rows, int grid_cols, int dim) {
  AUG_CHECK_ARG(dim % 4 == 0, "positional embedding needs dim % 4 == 0, got ",
                dim);
  const int half = dim / 2;     // per-axis budget
  const int pairs = half / 2;   // sin/cos pairs per axis
  auto axis_embed = [&](int pos) {
    std::vector<double> e(static_cast<size_t>(half));
    for (int i = 0; i < pairs; ++i) {
      const double omega =
          1.0 / std::pow(10000.0, static_cast<double>(2 * i) / half);
      e[static_cast<size_t>(2 * i)] = std::sin(pos * omega);
      e[static_cast<size_t>(2 * i + 1)] = std::cos(pos * omega);
    }
    return e;
  };
  std::vector<double> table(static_cast<size_t>(grid_rows) * grid_cols * dim);
  for (int r = 0; r < grid_rows; ++r) {
    const auto er = axis_embed(r);
    for (int c = 0; c < grid_cols; ++c) {
      const auto ec = axis_embed(c);
      double* out = table.data() + (static_cast<size_t>(r) * grid_cols + c) * dim;
      std::copy(er.begin(), er.end(), out);
      std::copy(ec.begin(), ec.end(), out + half);
    }
  }
  return table;
}

}  // namespace augraph
