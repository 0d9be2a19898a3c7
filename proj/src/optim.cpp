#include "augraph/optim.hpp"

#include <cmath>

#include "augraph/check.hpp"

namespace augraph {

double cosine_warmup_lr(int step, int total_steps, int warmup_steps,
                        double peak_lr) {
  AUG_CHECK_ARG(peak_lr > 0.0, "peak lr must be positive");
  AUG_CHECK_ARG(total_steps >= 1 && warmup_steps >= 0 &&
                    warmup_steps <= total_steps,
                "bad schedule: total ", total_steps, ", warmup ", warmup_steps);
  if (step < warmup_steps)
    return peak_lr * static_cast<double>(step + 1) /
           static_cast<double>(warmup_steps);
  const int span = total_steps - warmup_steps;
  if (span <= 0) return peak_lr;
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(span);
  return peak_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

AdamW::AdamW(std::vector<std::pair<std::string, Tensor>> params,
             const OptimConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& [name, p] : params_) {
    AUG_CHECK_ARG(p.defined(), "undefined parameter ", name);
    m_.emplace_back(static_cast<size_t>(p.size()), 0.0);
    v_.emplace_back(static_cast<size_t>(p.size()), 0.0);
  }
}

void AdamW::step() {
  ++t_;
  last_lr_ = cosine_warmup_lr(t_ - 1, cfg_.total_steps, cfg_.warmup_steps,
                              cfg_.lr);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi].second;
    if (!p.requires_grad()) continue;  // frozen
    const std::vector<double>& g = p.grad();
    if (g.empty()) continue;  // not touched by this step's graph
    std::vector<double>& val = p.mutable_values();
    const bool decay = p.rows() > 1;  // row vectors skip weight decay
    for (size_t i = 0; i < val.size(); ++i) {
      m_[pi][i] = cfg_.beta1 * m_[pi][i] + (1.0 - cfg_.beta1) * g[i];
      v_[pi][i] = cfg_.beta2 * v_[pi][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m_[pi][i] / bc1;
      const double vhat = v_[pi][i] / bc2;
      double upd = mhat / (std::sqrt(vhat) + cfg_.eps);
      if (decay) upd += cfg_.weight_decay * val[i];
      val[i] -= last_lr_ * upd;
    }
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace augraph
