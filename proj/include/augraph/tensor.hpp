#pragma once

// Reverse-mode autodiff over row-major 2-D double tensors.
//
// Every op builds a fresh node holding the result value plus a backward
// closure that scatters the incoming gradient to its parents. Nodes carry a
// global creation index; backward() walks the nodes reachable from the loss
// in reverse creation order, which is a valid topological order because ops
// only consume already-created nodes. Forward passes are pure functions of
// (parameter values, inputs): concurrent forwards on disjoint graphs are
// safe, but a parameter must not be updated while a forward pass reads it.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "augraph/check.hpp"

namespace augraph {

struct TensorNode {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on demand, same extent as value
  bool requires_grad = false;
  int64_t seq = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  int64_t size() const { return rows * cols; }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Disables graph recording in the current thread while alive (cheap forward
// passes for evaluation / prediction).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool grad_recording_enabled();

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int64_t rows, int64_t cols, bool requires_grad = false);
  static Tensor full(int64_t rows, int64_t cols, double fill,
                     bool requires_grad = false);
  static Tensor from_values(int64_t rows, int64_t cols,
                            std::vector<double> values,
                            bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  int64_t rows() const { return node_->rows; }
  int64_t cols() const { return node_->cols; }
  int64_t size() const { return node_->size(); }
  bool requires_grad() const { return node_->requires_grad; }

  double at(int64_t r, int64_t c) const {
    return node_->value[static_cast<size_t>(r * node_->cols + c)];
  }
  double scalar() const;

  const std::vector<double>& values() const { return node_->value; }
  // Mutable access to a leaf's payload (parameter updates, input staging).
  std::vector<double>& mutable_values() { return node_->value; }

  const std::vector<double>& grad() const { return node_->grad; }
  double grad_at(int64_t r, int64_t c) const {
    return node_->grad.empty() ? 0.0
                               : node_->grad[static_cast<size_t>(r * node_->cols + c)];
  }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  // Backprop from a scalar tensor through every reachable node.
  void backward();

  std::shared_ptr<TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor make_op(int64_t, int64_t, std::vector<double>,
                        std::vector<Tensor>,
                        std::function<void(TensorNode&)>);
};

// Builds a graph node from a computed value. `backward` may be empty for
// ops with no differentiable parents; recording is skipped entirely when
// no parent requires grad or a NoGradGuard is active.
Tensor make_op(int64_t rows, int64_t cols, std::vector<double> value,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward);

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// out = c * a where c is a constant (non-differentiated) matrix, row-major
// [c_rows x a.rows()].
Tensor left_const_matmul(const std::vector<double>& c, int64_t c_rows,
                         const Tensor& a);

// ---- broadcasts / reductions ----
Tensor add_rowvec(const Tensor& a, const Tensor& v);  // v is [1 x cols]
Tensor sum_all(const Tensor& a);                      // [1 x 1]
Tensor mean_all(const Tensor& a);                     // [1 x 1]
Tensor col_mean(const Tensor& a);                     // [1 x cols]
// Means over consecutive row groups: [g*k x c] -> [g x c].
Tensor group_row_mean(const Tensor& a, int64_t group_size);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma,
                       const Tensor& beta, double eps = 1e-6);

// ---- structure ----
Tensor gather_rows(const Tensor& a, const std::vector<int64_t>& idx);
Tensor row(const Tensor& a, int64_t i);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, int64_t c0, int64_t c1);
// Rebuilds a full [m x d] token matrix: rows listed in visible_idx come from
// `visible` (in order), every other row is a copy of mask_token [1 x d].
Tensor compose_tokens(const Tensor& visible,
                      const std::vector<int64_t>& visible_idx,
                      const Tensor& mask_token, int64_t m);

}  // namespace augraph
