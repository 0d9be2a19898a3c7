#include "augraph/objectives.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "augraph/check.hpp"

namespace augraph {

void AUPredictions::validate() const {
  AUG_CHECK_ARG(num_frames >= 1 && num_aus >= 1, "predictions are empty");
  AUG_CHECK_ARG(scores.size() == static_cast<size_t>(num_frames * num_aus),
                "scores size mismatch");
  AUG_CHECK_ARG(labels.size() == scores.size(), "labels size mismatch");
  AUG_CHECK_ARG(frame_valid.size() == static_cast<size_t>(num_frames),
                "frame_valid size mismatch");
  for (double s : scores)
    AUG_CHECK_ARG(std::isfinite(s) && s >= 0.0 && s <= 1.0,
                  "score out of [0,1]: ", s);
  for (int y : labels)
    AUG_CHECK_ARG(y == 0 || y == 1 || y == -1, "label must be 0/1/-1, got ", y);
}

void ConfusionCounts::reset(size_t num_aus) {
  tp.assign(num_aus, 0);
  fp.assign(num_aus, 0);
  fn.assign(num_aus, 0);
  tn.assign(num_aus, 0);
  frames_scored = 0;
}

void ConfusionCounts::accumulate(const AUPredictions& pred, double threshold) {
  if (tp.empty()) reset(static_cast<size_t>(pred.num_aus));
  AUG_CHECK_ARG(num_aus() == static_cast<size_t>(pred.num_aus),
                "confusion counts track ", num_aus(), " AUs, batch has ",
                pred.num_aus);
  for (int64_t t = 0; t < pred.num_frames; ++t) {
    if (!pred.frame_valid[static_cast<size_t>(t)]) continue;
    ++frames_scored;
    for (int64_t i = 0; i < pred.num_aus; ++i) {
      const int y = pred.label_at(t, i);
      if (y < 0) continue;
      const bool hat = pred.score_at(t, i) >= threshold;
      auto idx = static_cast<size_t>(i);
      if (hat && y == 1)
        ++tp[idx];
      else if (hat && y == 0)
        ++fp[idx];
      else if (!hat && y == 1)
        ++fn[idx];
      else
        ++tn[idx];
    }
  }
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
  if (tp.empty()) reset(other.num_aus());
  AUG_CHECK_ARG(num_aus() == other.num_aus(), "merging mismatched AU counts");
  for (size_t i = 0; i < tp.size(); ++i) {
    tp[i] += other.tp[i];
    fp[i] += other.fp[i];
    fn[i] += other.fn[i];
    tn[i] += other.tn[i];
  }
  frames_scored += other.frames_scored;
}

MetricReport ConfusionCounts::report(
    const std::vector<std::string>& names) const {
  AUG_CHECK_ARG(names.size() == num_aus(), "report needs one name per AU");
  MetricReport rep;
  rep.au_names = names;
  rep.frames_scored = frames_scored;
  rep.per_au.resize(num_aus());
  double sum_f1 = 0.0;
  for (size_t i = 0; i < num_aus(); ++i) {
    AuMetric& m = rep.per_au[i];
    m.tp = tp[i];
    m.fp = fp[i];
    m.fn = fn[i];
    m.tn = tn[i];
    m.precision = (tp[i] + fp[i] > 0)
                      ? static_cast<double>(tp[i]) / static_cast<double>(tp[i] + fp[i])
                      : 0.0;
    m.recall = (tp[i] + fn[i] > 0)
                   ? static_cast<double>(tp[i]) / static_cast<double>(tp[i] + fn[i])
                   : 0.0;
    const double pr = m.precision + m.recall;
    m.f1 = (pr > 0.0) ? 2.0 * m.precision * m.recall / pr : 0.0;
    sum_f1 += m.f1;
  }
  rep.average_f1 = num_aus() > 0 ? sum_f1 / static_cast<double>(num_aus()) : 0.0;
  return rep;
}

std::string MetricReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << std::setw(6) << "AU" << std::setw(8) << "F1%" << std::setw(8) << "P%"
     << std::setw(8) << "R%" << "\n";
  for (size_t i = 0; i < per_au.size(); ++i) {
    os << std::setw(6) << au_names[i] << std::setw(8) << 100.0 * per_au[i].f1
       << std::setw(8) << 100.0 * per_au[i].precision << std::setw(8)
       << 100.0 * per_au[i].recall << "\n";
  }
  os << std::setw(6) << "Avg" << std::setw(8) << 100.0 * average_f1 << "\n";
  os << "frames scored: " << frames_scored << "\n";
  return os.str();
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["average_f1"] = average_f1;
  j["frames_scored"] = frames_scored;
  nlohmann::json aus = nlohmann::json::array();
  for (size_t i = 0; i < per_au.size(); ++i) {
    aus.push_back({{"au", au_names[i]},
                   {"f1", per_au[i].f1},
                   {"precision", per_au[i].precision},
                   {"recall", per_au[i].recall},
                   {"tp", per_au[i].tp},
                   {"fp", per_au[i].fp},
                   {"fn", per_au[i].fn},
                   {"tn", per_au[i].tn}});
  }
  j["per_au"] = aus;
  return j.dump(2);
}

Tensor masked_mse_loss(const Tensor& reconstructed, const Tensor& original) {
  AUG_CHECK_ARG(reconstructed.rows() == original.rows() &&
                    reconstructed.cols() == original.cols(),
                "masked mse: shapes differ, [", reconstructed.rows(), "x",
                reconstructed.cols(), "] vs [", original.rows(), "x",
                original.cols(), "]");
  Tensor diff = sub(reconstructed, original);
  return mean_all(mul(diff, diff));
}

Tensor asymmetric_au_loss(const Tensor& scores_t,
                          const std::vector<int>& labels,
                          const std::vector<uint8_t>& frame_valid) {
  const int64_t t_frames = scores_t.rows();
  const int64_t n = scores_t.cols();
  AUG_CHECK_ARG(labels.size() == static_cast<size_t>(t_frames * n),
                "au loss: label count mismatch");
  AUG_CHECK_ARG(frame_valid.size() == static_cast<size_t>(t_frames),
                "au loss: frame_valid length mismatch");

  Tensor y = Tensor::zeros(t_frames, n);
  Tensor w = Tensor::zeros(t_frames, n);
  int64_t count = 0;
  for (int64_t t = 0; t < t_frames; ++t) {
    for (int64_t i = 0; i < n; ++i) {
      const int lab = labels[static_cast<size_t>(t * n + i)];
      AUG_CHECK_ARG(lab == 0 || lab == 1 || lab == -1,
                    "au loss: label must be 0/1/-1, got ", lab);
      if (!frame_valid[static_cast<size_t>(t)] || lab < 0) continue;
      y.mutable_values()[static_cast<size_t>(t * n + i)] = lab;
      w.mutable_values()[static_cast<size_t>(t * n + i)] = 1.0;
      ++count;
    }
  }
  if (count == 0) return Tensor::zeros(1, 1);

  Tensor ones = Tensor::full(t_frames, n, 1.0);
  Tensor p = clamp(scores_t, kLossProbEpsilon, 1.0 - kLossProbEpsilon);
  Tensor pos = mul(y, log(p));
  Tensor neg = mul(mul(sub(ones, y), p), log(sub(ones, p)));
  Tensor masked = mul(w, add(pos, neg));
  return scale(sum_all(masked), -1.0 / static_cast<double>(count));
}

double asymmetric_au_loss_value(const AUPredictions& pred) {
  double total = 0.0;
  int64_t count = 0;
  for (int64_t t = 0; t < pred.num_frames; ++t) {
    if (!pred.frame_valid[static_cast<size_t>(t)]) continue;
    for (int64_t i = 0; i < pred.num_aus; ++i) {
      const int y = pred.label_at(t, i);
      if (y < 0) continue;
      double p = pred.score_at(t, i);
      p = std::min(std::max(p, kLossProbEpsilon), 1.0 - kLossProbEpsilon);
      total += y * std::log(p) + p * (1.0 - y) * std::log(1.0 - p);
      ++count;
    }
  }
  return count > 0 ? -total / static_cast<double>(count) : 0.0;
}

MetricReport f1_scores(const AUPredictions& pred, double threshold) {
  AUG_CHECK_ARG(threshold > 0.0 && threshold < 1.0,
                "threshold must lie in (0,1), got ", threshold);
  ConfusionCounts counts;
  counts.accumulate(pred, threshold);
  std::vector<std::string> names = pred.au_names;
  if (names.empty()) {
    for (int64_t i = 0; i < pred.num_aus; ++i)
      names.push_back("AU?" + std::to_string(i));
  }
  return counts.report(names);
}

}  // namespace augraph
