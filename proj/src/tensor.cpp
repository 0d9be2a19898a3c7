#include "augraph/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace augraph {

namespace {

std::atomic<int64_t> g_seq{0};
thread_local bool g_grad_enabled = true;

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap map_of(const TensorNode& n) {
  return ECMap(n.value.data(), n.rows, n.cols);
}
ECMap grad_of(const TensorNode& n) {
  return ECMap(n.grad.data(), n.rows, n.cols);
}
EMap grad_mut(TensorNode& n) {
  n.ensure_grad();
  return EMap(n.grad.data(), n.rows, n.cols);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  AUG_CHECK(a.rows() == b.rows() && a.cols() == b.cols(), op,
            ": shape mismatch [", a.rows(), "x", a.cols(), "] vs [", b.rows(),
            "x", b.cols(), "]");
}

}  // namespace

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_recording_enabled() { return g_grad_enabled; }

Tensor Tensor::zeros(int64_t rows, int64_t cols, bool requires_grad) {
  return full(rows, cols, 0.0, requires_grad);
}

Tensor Tensor::full(int64_t rows, int64_t cols, double fill, bool requires_grad) {
  return from_values(rows, cols,
                     std::vector<double>(static_cast<size_t>(rows * cols), fill),
                     requires_grad);
}

Tensor Tensor::from_values(int64_t rows, int64_t cols, std::vector<double> values,
                           bool requires_grad) {
  AUG_CHECK(rows >= 0 && cols >= 0 &&
                values.size() == static_cast<size_t>(rows * cols),
            "tensor: payload size ", values.size(), " does not match [", rows,
            "x", cols, "]");
  auto node = std::make_shared<TensorNode>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
  return Tensor(std::move(node));
}

double Tensor::scalar() const {
  AUG_CHECK(size() == 1, "scalar(): tensor is [", rows(), "x", cols(), "]");
  return node_->value[0];
}

void Tensor::backward() {
  AUG_CHECK(size() == 1, "backward(): loss must be a scalar");
  AUG_CHECK(node_->requires_grad,
            "backward(): loss does not depend on any differentiable tensor");

  // Collect reachable nodes, then run closures in reverse creation order.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<TensorNode*> stack{node_.get()};
  seen.insert(node_.get());
  while (!stack.empty()) {
    TensorNode* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const TensorNode* a, const TensorNode* b) { return a->seq > b->seq; });

  node_->ensure_grad();
  node_->grad[0] = 1.0;
  for (TensorNode* n : order) {
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

Tensor make_op(int64_t rows, int64_t cols, std::vector<double> value,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward) {
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) needs_grad = needs_grad || p.requires_grad();
  }
  Tensor out = Tensor::from_values(rows, cols, std::move(value), needs_grad);
  if (needs_grad) {
    auto& node = *out.node();
    node.parents.reserve(parents.size());
    for (auto& p : parents) node.parents.push_back(p.node());
    node.backward_fn = std::move(backward);
  }
  return out;
}

// ---------------------------------------------------------------------------
// elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> v(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < v.size(); ++i) v[i] += bv[i];
  return make_op(a.rows(), a.cols(), std::move(v), {a, b}, [](TensorNode& n) {
    for (size_t k = 0; k < 2; ++k) {
      auto& p = *n.parents[k];
      if (!p.requires_grad) continue;
      p.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> v(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < v.size(); ++i) v[i] -= bv[i];
  return make_op(a.rows(), a.cols(), std::move(v), {a, b}, [](TensorNode& n) {
    auto& pa = *n.parents[0];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
    }
    auto& pb = *n.parents[1];
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] -= n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> v(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < v.size(); ++i) v[i] *= bv[i];
  return make_op(a.rows(), a.cols(), std::move(v), {a, b}, [](TensorNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i] * pa.value[i];
    }
  });
}

Tensor divide(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "divide");
  std::vector<double> v(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < v.size(); ++i) v[i] /= bv[i];
  return make_op(a.rows(), a.cols(), std::move(v), {a, b}, [](TensorNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] / pb.value[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i)
        pb.grad[i] -= n.grad[i] * n.value[i] / pb.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> v(a.values());
  for (double& x : v) x *= s;
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [s](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += s * n.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> v(a.values());
  for (double& x : v) x += s;
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> v(a.values());
  for (double& x : v) x = x > 0.0 ? x : 0.0;
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      if (p.value[i] > 0.0) p.grad[i] += n.grad[i];
  });
}

Tensor gelu(const Tensor& a) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  std::vector<double> v(a.values());
  for (double& x : v) x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      const double x = p.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      p.grad[i] += n.grad[i] * (cdf + x * pdf);
    }
  });
}

Tensor log(const Tensor& a) {
  std::vector<double> v(a.values());
  for (double& x : v) x = std::log(x);
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i] / p.value[i];
  });
}

Tensor sqrt(const Tensor& a) {
  std::vector<double> v(a.values());
  for (double& x : v) x = std::sqrt(x);
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      p.grad[i] += n.grad[i] * 0.5 / std::max(n.value[i], 1e-12);
  });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  AUG_CHECK(lo < hi, "clamp: lo must be < hi");
  std::vector<double> v(a.values());
  for (double& x : v) x = std::min(std::max(x, lo), hi);
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [lo, hi](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      if (p.value[i] > lo && p.value[i] < hi) p.grad[i] += n.grad[i];
  });
}

// ---------------------------------------------------------------------------
// linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  AUG_CHECK(a.cols() == b.rows(), "matmul: inner dims ", a.cols(), " vs ",
            b.rows());
  std::vector<double> v(static_cast<size_t>(a.rows() * b.cols()));
  {
    ECMap am(a.values().data(), a.rows(), a.cols());
    ECMap bm(b.values().data(), b.rows(), b.cols());
    EMap(v.data(), a.rows(), b.cols()).noalias() = am * bm;
  }
  return make_op(a.rows(), b.cols(), std::move(v), {a, b}, [](TensorNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    auto g = grad_of(n);
    if (pa.requires_grad) grad_mut(pa).noalias() += g * map_of(pb).transpose();
    if (pb.requires_grad) grad_mut(pb).noalias() += map_of(pa).transpose() * g;
  });
}

Tensor transpose(const Tensor& a) {
  std::vector<double> v(static_cast<size_t>(a.size()));
  ECMap am(a.values().data(), a.rows(), a.cols());
  EMap(v.data(), a.cols(), a.rows()) = am.transpose();
  return make_op(a.cols(), a.rows(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    grad_mut(p).noalias() += grad_of(n).transpose();
  });
}

Tensor left_const_matmul(const std::vector<double>& c, int64_t c_rows,
                         const Tensor& a) {
  AUG_CHECK(c.size() == static_cast<size_t>(c_rows * a.rows()),
            "left_const_matmul: constant is not [", c_rows, "x", a.rows(), "]");
  std::vector<double> v(static_cast<size_t>(c_rows * a.cols()));
  {
    ECMap cm(c.data(), c_rows, a.rows());
    ECMap am(a.values().data(), a.rows(), a.cols());
    EMap(v.data(), c_rows, a.cols()).noalias() = cm * am;
  }
  // The closure keeps its own copy of the constant.
  std::vector<double> c_copy = c;
  return make_op(c_rows, a.cols(), std::move(v), {a},
                 [c_copy = std::move(c_copy), c_rows](TensorNode& n) {
                   auto& p = *n.parents[0];
                   ECMap cm(c_copy.data(), c_rows, p.rows);
                   grad_mut(p).noalias() += cm.transpose() * grad_of(n);
                 });
}

// ---------------------------------------------------------------------------
// broadcasts / reductions

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  AUG_CHECK(v.rows() == 1 && v.cols() == a.cols(),
            "add_rowvec: vector must be [1x", a.cols(), "]");
  std::vector<double> out(a.values());
  const auto& vv = v.values();
  const int64_t c = a.cols();
  for (int64_t r = 0; r < a.rows(); ++r)
    for (int64_t j = 0; j < c; ++j) out[static_cast<size_t>(r * c + j)] += vv[static_cast<size_t>(j)];
  return make_op(a.rows(), a.cols(), std::move(out), {a, v}, [](TensorNode& n) {
    auto& pa = *n.parents[0];
    auto& pv = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
    }
    if (pv.requires_grad) {
      pv.ensure_grad();
      const int64_t c = n.cols;
      for (int64_t r = 0; r < n.rows; ++r)
        for (int64_t j = 0; j < c; ++j)
          pv.grad[static_cast<size_t>(j)] += n.grad[static_cast<size_t>(r * c + j)];
    }
  });
}

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return make_op(1, 1, {s}, {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    const double g = n.grad[0];
    for (double& x : p.grad) x += g;
  });
}

Tensor mean_all(const Tensor& a) {
  AUG_CHECK(a.size() > 0, "mean_all: empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

Tensor col_mean(const Tensor& a) { return group_row_mean(a, a.rows()); }

Tensor group_row_mean(const Tensor& a, int64_t group_size) {
  AUG_CHECK(group_size >= 1 && a.rows() % group_size == 0,
            "group_row_mean: ", a.rows(), " rows not divisible by group ",
            group_size);
  const int64_t groups = a.rows() / group_size;
  const int64_t c = a.cols();
  std::vector<double> v(static_cast<size_t>(groups * c), 0.0);
  const auto& av = a.values();
  for (int64_t g = 0; g < groups; ++g)
    for (int64_t r = 0; r < group_size; ++r)
      for (int64_t j = 0; j < c; ++j)
        v[static_cast<size_t>(g * c + j)] +=
            av[static_cast<size_t>((g * group_size + r) * c + j)];
  const double inv = 1.0 / static_cast<double>(group_size);
  for (double& x : v) x *= inv;
  return make_op(groups, c, std::move(v), {a}, [group_size, inv](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    const int64_t c = n.cols;
    for (int64_t g = 0; g < n.rows; ++g)
      for (int64_t r = 0; r < group_size; ++r)
        for (int64_t j = 0; j < c; ++j)
          p.grad[static_cast<size_t>((g * group_size + r) * c + j)] +=
              inv * n.grad[static_cast<size_t>(g * c + j)];
  });
}

Tensor softmax_rows(const Tensor& a) {
  std::vector<double> v(a.values());
  const int64_t c = a.cols();
  for (int64_t r = 0; r < a.rows(); ++r) {
    double* p = v.data() + r * c;
    double mx = p[0];
    for (int64_t j = 1; j < c; ++j) mx = std::max(mx, p[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      p[j] = std::exp(p[j] - mx);
      sum += p[j];
    }
    for (int64_t j = 0; j < c; ++j) p[j] /= sum;
  }
  return make_op(a.rows(), a.cols(), std::move(v), {a}, [](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    const int64_t c = n.cols;
    for (int64_t r = 0; r < n.rows; ++r) {
      const double* y = n.value.data() + r * c;
      const double* g = n.grad.data() + r * c;
      double dot = 0.0;
      for (int64_t j = 0; j < c; ++j) dot += g[j] * y[j];
      double* pg = p.grad.data() + r * c;
      for (int64_t j = 0; j < c; ++j) pg[j] += (g[j] - dot) * y[j];
    }
  });
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                       double eps) {
  AUG_CHECK(gamma.rows() == 1 && gamma.cols() == a.cols() && beta.rows() == 1 &&
                beta.cols() == a.cols(),
            "layer_norm_rows: affine params must be [1x", a.cols(), "]");
  const int64_t c = a.cols();
  std::vector<double> v(static_cast<size_t>(a.size()));
  std::vector<double> inv_std(static_cast<size_t>(a.rows()));
  std::vector<double> normed(static_cast<size_t>(a.size()));
  const auto& av = a.values();
  const auto& gv = gamma.values();
  const auto& bv = beta.values();
  for (int64_t r = 0; r < a.rows(); ++r) {
    const double* x = av.data() + r * c;
    double mean = 0.0;
    for (int64_t j = 0; j < c; ++j) mean += x[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<double>(c);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(r)] = istd;
    for (int64_t j = 0; j < c; ++j) {
      const double y = (x[j] - mean) * istd;
      normed[static_cast<size_t>(r * c + j)] = y;
      v[static_cast<size_t>(r * c + j)] = y * gv[static_cast<size_t>(j)] + bv[static_cast<size_t>(j)];
    }
  }
  return make_op(
      a.rows(), a.cols(), std::move(v), {a, gamma, beta},
      [inv_std = std::move(inv_std), normed = std::move(normed)](TensorNode& n) {
        auto& pa = *n.parents[0];
        auto& pg = *n.parents[1];
        auto& pb = *n.parents[2];
        const int64_t c = n.cols;
        if (pg.requires_grad) pg.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        if (pa.requires_grad) pa.ensure_grad();
        for (int64_t r = 0; r < n.rows; ++r) {
          const double* g = n.grad.data() + r * c;
          const double* y = normed.data() + r * c;
          if (pg.requires_grad)
            for (int64_t j = 0; j < c; ++j) pg.grad[static_cast<size_t>(j)] += g[j] * y[j];
          if (pb.requires_grad)
            for (int64_t j = 0; j < c; ++j) pb.grad[static_cast<size_t>(j)] += g[j];
          if (pa.requires_grad) {
            // dx = istd * (dy - mean(dy) - y * mean(dy*y)), dy = g*gamma
            double mean_dy = 0.0, mean_dyy = 0.0;
            const double istd = inv_std[static_cast<size_t>(r)];
            for (int64_t j = 0; j < c; ++j) {
              const double dy = g[j] * pg.value[static_cast<size_t>(j)];
              mean_dy += dy;
              mean_dyy += dy * y[j];
            }
            mean_dy /= static_cast<double>(c);
            mean_dyy /= static_cast<double>(c);
            double* pgrad = pa.grad.data() + r * c;
            for (int64_t j = 0; j < c; ++j) {
              const double dy = g[j] * pg.value[static_cast<size_t>(j)];
              pgrad[j] += istd * (dy - mean_dy - y[j] * mean_dyy);
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// structure

Tensor gather_rows(const Tensor& a, const std::vector<int64_t>& idx) {
  const int64_t c = a.cols();
  std::vector<double> v(idx.size() * static_cast<size_t>(c));
  const auto& av = a.values();
  for (size_t i = 0; i < idx.size(); ++i) {
    AUG_CHECK(idx[i] >= 0 && idx[i] < a.rows(), "gather_rows: index ", idx[i],
              " out of [0,", a.rows(), ")");
    std::copy_n(av.data() + idx[i] * c, c, v.data() + static_cast<int64_t>(i) * c);
  }
  std::vector<int64_t> idx_copy = idx;
  return make_op(static_cast<int64_t>(idx.size()), c, std::move(v), {a},
                 [idx_copy = std::move(idx_copy)](TensorNode& n) {
                   auto& p = *n.parents[0];
                   p.ensure_grad();
                   const int64_t c = n.cols;
                   for (size_t i = 0; i < idx_copy.size(); ++i)
                     for (int64_t j = 0; j < c; ++j)
                       p.grad[static_cast<size_t>(idx_copy[i] * c + j)] +=
                           n.grad[static_cast<size_t>(static_cast<int64_t>(i) * c + j)];
                 });
}

Tensor row(const Tensor& a, int64_t i) { return gather_rows(a, {i}); }

Tensor concat_rows(std::span<const Tensor> parts) {
  AUG_CHECK(!parts.empty(), "concat_rows: no parts");
  const int64_t c = parts[0].cols();
  int64_t rows = 0;
  for (const auto& p : parts) {
    AUG_CHECK(p.cols() == c, "concat_rows: column mismatch");
    rows += p.rows();
  }
  std::vector<double> v;
  v.reserve(static_cast<size_t>(rows * c));
  std::vector<Tensor> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    v.insert(v.end(), p.values().begin(), p.values().end());
    parents.push_back(p);
  }
  return make_op(rows, c, std::move(v), std::move(parents), [](TensorNode& n) {
    int64_t r0 = 0;
    const int64_t c = n.cols;
    for (auto& pp : n.parents) {
      auto& p = *pp;
      if (p.requires_grad) {
        p.ensure_grad();
        for (int64_t r = 0; r < p.rows; ++r)
          for (int64_t j = 0; j < c; ++j)
            p.grad[static_cast<size_t>(r * c + j)] +=
                n.grad[static_cast<size_t>((r0 + r) * c + j)];
      }
      r0 += p.rows;
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  AUG_CHECK(!parts.empty(), "concat_cols: no parts");
  const int64_t r = parts[0].rows();
  int64_t cols = 0;
  for (const auto& p : parts) {
    AUG_CHECK(p.rows() == r, "concat_cols: row mismatch");
    cols += p.cols();
  }
  std::vector<double> v(static_cast<size_t>(r * cols));
  std::vector<Tensor> parents;
  parents.reserve(parts.size());
  int64_t c0 = 0;
  for (const auto& p : parts) {
    for (int64_t rr = 0; rr < r; ++rr)
      std::copy_n(p.values().data() + rr * p.cols(), p.cols(),
                  v.data() + rr * cols + c0);
    c0 += p.cols();
    parents.push_back(p);
  }
  return make_op(r, cols, std::move(v), std::move(parents), [](TensorNode& n) {
    int64_t c0 = 0;
    for (auto& pp : n.parents) {
      auto& p = *pp;
      if (p.requires_grad) {
        p.ensure_grad();
        for (int64_t rr = 0; rr < p.rows; ++rr)
          for (int64_t j = 0; j < p.cols; ++j)
            p.grad[static_cast<size_t>(rr * p.cols + j)] +=
                n.grad[static_cast<size_t>(rr * n.cols + c0 + j)];
      }
      c0 += p.cols;
    }
  });
}

Tensor slice_cols(const Tensor& a, int64_t c0, int64_t c1) {
  AUG_CHECK(0 <= c0 && c0 < c1 && c1 <= a.cols(), "slice_cols: bad range [", c0,
            ",", c1, ") of ", a.cols());
  const int64_t w = c1 - c0;
  std::vector<double> v(static_cast<size_t>(a.rows() * w));
  for (int64_t r = 0; r < a.rows(); ++r)
    std::copy_n(a.values().data() + r * a.cols() + c0, w, v.data() + r * w);
  return make_op(a.rows(), w, std::move(v), {a}, [c0](TensorNode& n) {
    auto& p = *n.parents[0];
    p.ensure_grad();
    for (int64_t r = 0; r < n.rows; ++r)
      for (int64_t j = 0; j < n.cols; ++j)
        p.grad[static_cast<size_t>(r * p.cols + c0 + j)] +=
            n.grad[static_cast<size_t>(r * n.cols + j)];
  });
}

Tensor compose_tokens(const Tensor& visible,
                      const std::vector<int64_t>& visible_idx,
                      const Tensor& mask_token, int64_t m) {
  AUG_CHECK(visible.rows() == static_cast<int64_t>(visible_idx.size()),
            "compose_tokens: ", visible.rows(), " rows vs ", visible_idx.size(),
            " indices");
  AUG_CHECK(mask_token.rows() == 1 && mask_token.cols() == visible.cols(),
            "compose_tokens: mask token must be [1x", visible.cols(), "]");
  const int64_t c = visible.cols();
  std::vector<double> v(static_cast<size_t>(m * c));
  std::vector<uint8_t> is_visible(static_cast<size_t>(m), 0);
  for (int64_t r = 0; r < m; ++r)
    std::copy_n(mask_token.values().data(), c, v.data() + r * c);
  for (size_t i = 0; i < visible_idx.size(); ++i) {
    const int64_t r = visible_idx[i];
    AUG_CHECK(r >= 0 && r < m && !is_visible[static_cast<size_t>(r)],
              "compose_tokens: bad or duplicate index ", r);
    is_visible[static_cast<size_t>(r)] = 1;
    std::copy_n(visible.values().data() + static_cast<int64_t>(i) * c, c,
                v.data() + r * c);
  }
  std::vector<int64_t> idx_copy = visible_idx;
  return make_op(
      m, c, std::move(v), {visible, mask_token},
      [idx_copy = std::move(idx_copy), is_visible = std::move(is_visible)](TensorNode& n) {
        auto& pv = *n.parents[0];
        auto& pm = *n.parents[1];
        const int64_t c = n.cols;
        if (pv.requires_grad) {
          pv.ensure_grad();
          for (size_t i = 0; i < idx_copy.size(); ++i)
            for (int64_t j = 0; j < c; ++j)
              pv.grad[static_cast<size_t>(static_cast<int64_t>(i) * c + j)] +=
                  n.grad[static_cast<size_t>(idx_copy[i] * c + j)];
        }
        if (pm.requires_grad) {
          pm.ensure_grad();
          for (int64_t r = 0; r < n.rows; ++r) {
            if (is_visible[static_cast<size_t>(r)]) continue;
            for (int64_t j = 0; j < c; ++j)
              pm.grad[static_cast<size_t>(j)] += n.grad[static_cast<size_t>(r * c + j)];
          }
        }
      });
}

}  // namespace augraph
