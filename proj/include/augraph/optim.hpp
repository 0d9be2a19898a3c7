#pragma once

#include <cstdint>
#include <vector>

#include "augraph/nn.hpp"
#include "augraph/tensor.hpp"

namespace augraph {

struct OptimConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
  int warmup_steps = 20;
  int total_steps = 500;
};

// Cosine decay with linear warmup. Steps are 0-based; the first post-warmup
// step runs at exactly peak_lr.
double cosine_warmup_lr(int step, int total_steps, int warmup_steps,
                        double peak_lr);

// Adam with decoupled weight decay. Row-vector parameters (gains, biases,
// the mask token) are excluded from decay.
class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, Tensor>> params,
        const OptimConfig& cfg);

  // Applies one update using the gradients currently stored on the params.
  void step();
  void zero_grad();
  int steps_taken() const { return t_; }
  double last_lr() const { return last_lr_; }

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
  OptimConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
  double last_lr_ = 0.0;
};

}  // namespace augraph
