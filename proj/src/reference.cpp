#include "noisycp/reference.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "noisycp/scores.hpp"

namespace noisycp::reference {

double aps_score_sorted(std::span<const double> probs, Label y) {
  if (y < 0 || static_cast<std::size_t>(y) >= probs.size()) {
    throw std::out_of_range("class label out of range");
  }
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  const double py = probs[static_cast<std::size_t>(y)];
  double total = 0.0;
  for (std::size_t idx : order) {
    if (probs[idx] < py) break;
    total += probs[idx];
  }
  return total;
}

double rand_aps_score_sorted(std::span<const double> probs, Label y, double u) {
  if (y < 0 || static_cast<std::size_t>(y) >= probs.size()) {
    throw std::out_of_range("class label out of range");
  }
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  const double py = probs[static_cast<std::size_t>(y)];
  double strict = 0.0;
  for (std::size_t idx : order) {
    if (!(probs[idx] > py)) break;
    strict += probs[idx];
  }
  return strict + u * py;
}

double conformal_quantile_sorted(std::span<const double> scores, double alpha) {
  const std::size_t m = conformal_quantile_index(scores.size(), alpha);
  if (m == 0 || m > scores.size()) return kInfThreshold;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[m - 1];
}

double conformal_quantile_counting(std::span<const double> scores, double alpha) {
  const std::size_t m = conformal_quantile_index(scores.size(), alpha);
  if (m == 0 || m > scores.size()) return kInfThreshold;
  // The m-th smallest is the smallest candidate value v with
  // |{s : s <= v}| >= m, scanning candidates directly.
  double best = kInfThreshold;
  for (double candidate : scores) {
    std::size_t at_or_below = 0;
    for (double s : scores) {
      if (s <= candidate) ++at_or_below;
    }
    if (at_or_below >= m && candidate < best) best = candidate;
  }
  return best;
}

double robust_score_posterior(std::span<const double> probs, Label observed,
                              const NoiseModel& model, const ScoreSpec& spec,
                              std::optional<double> u) {
  std::vector<double> posterior(probs.size());
  posterior_true_label(model, observed, posterior);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += posterior[i] * class_score(probs, static_cast<Label>(i), spec, u);
  }
  return total;
}

bool nres_covers_threshold_form(std::span<const double> probs, Label y,
                                const CalibrationResult& calib,
                                std::optional<double> u) {
  if (calib.epsilon >= 1.0) {
    throw std::invalid_argument("threshold form needs epsilon < 1");
  }
  const double mean = mean_class_score(probs, calib.score, u);
  const double threshold = (calib.q - calib.epsilon * mean) / (1.0 - calib.epsilon);
  return class_score(probs, y, calib.score, u) <= threshold;
}

SplitTable run_repeated_splits_serial(const LabeledPool& pool,
                                      const SplitConfig& config) {
  validate(config, pool);
  SplitTable table;
  table.methods = config.methods;
  table.by_method.assign(config.methods.size(), {});
  for (auto& slot : table.by_method) slot.resize(config.n_splits);
  for (std::size_t j = 0; j < config.n_splits; ++j) {
    const auto outcomes =
        evaluate_split(pool, config, derive_seed(config.master_seed, j));
    for (std::size_t mi = 0; mi < outcomes.size(); ++mi) {
      table.by_method[mi][j] = outcomes[mi];
    }
  }
  return table;
}

}  // namespace noisycp::reference
