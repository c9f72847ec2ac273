#include "noisycp/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace noisycp {
namespace {

NoiseModel model_of(const CalibrationResult& calib) {
  return NoiseModel{calib.epsilon, calib.k};
}

// Effective membership score of one candidate class under `calib`.
double membership_score(std::span<const double> probs, Label y,
                        const CalibrationResult& calib,
                        std::optional<double> u) {
  if (calib.method == MethodKind::NRES_CP) {
    return robust_score(probs, y, model_of(calib), calib.score, u);
  }
  return class_score(probs, y, calib.score, u);
}

}  // namespace

void validate_alpha(double alpha) {
  if (!(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
}

std::size_t conformal_quantile_index(std::size_t n, double alpha) {
  validate_alpha(alpha);
  if (n == 0) throw std::invalid_argument("need at least one calibration score");
  const double target = std::ceil(static_cast<double>(n + 1) * (1.0 - alpha));
  return static_cast<std::size_t>(target);
}

double conformal_quantile(std::span<const double> scores, double alpha) {
  const std::size_t m = conformal_quantile_index(scores.size(), alpha);
  if (m > scores.size()) return kInfThreshold;
  std::vector<double> work(scores.begin(), scores.end());
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(m - 1),
                   work.end());
  return work[m - 1];
}

std::vector<double> calibration_scores(const LabeledPool& pool, MethodKind method,
                                       const NoiseModel& noise,
                                       const ScoreSpec& spec, Rng* rng) {
  validate(spec);
  validate(noise);
  if (noise.k != pool.k()) {
    throw std::invalid_argument("noise model k does not match pool k");
  }
  if (spec.randomized != (rng != nullptr)) {
    throw std::invalid_argument(
        spec.randomized ? "randomized score needs an rng"
                        : "deterministic score takes no rng");
  }
  if (method == MethodKind::ORACLE_CP && !pool.clean) {
    throw std::invalid_argument("oracle calibration needs clean labels");
  }

  const auto& labels = method == MethodKind::ORACLE_CP ? *pool.clean : pool.observed;
  const bool corrected =
      method == MethodKind::NRES_CP || method == MethodKind::NR_CP;

  std::vector<double> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::optional<double> u;
    if (rng) u = rng->uniform01();
    const auto row = pool.probs.row(i);
    scores[i] = corrected ? robust_score(row, labels[i], noise, spec, u)
                          : class_score(row, labels[i], spec, u);
  }
  return scores;
}

CalibrationResult calibrate(const LabeledPool& pool, MethodKind method,
                            double alpha, const NoiseModel& noise,
                            const ScoreSpec& spec, std::uint64_t seed) {
  validate_alpha(alpha);
  validate(pool);
  Rng rng(seed);
  const auto scores = calibration_scores(pool, method, noise, spec,
                                         spec.randomized ? &rng : nullptr);

  CalibrationResult result;
  result.method = method;
  result.q = conformal_quantile(scores, alpha);
  result.alpha = alpha;
  result.n = pool.size();
  result.epsilon = noise.epsilon;
  result.k = pool.k();
  result.score = spec;
  result.seed = seed;
  return result;
}

std::vector<Label> prediction_set(std::span<const double> probs,
                                  const CalibrationResult& calib,
                                  std::optional<double> u, bool force_nonempty) {
  if (probs.size() != static_cast<std::size_t>(calib.k)) {
    throw std::invalid_argument("probability row does not match calibrated k");
  }
  std::vector<Label> members;
  for (Label y = 0; y < calib.k; ++y) {
    if (membership_score(probs, y, calib, u) <= calib.q) {
      members.push_back(y);
    }
  }
  if (members.empty() && force_nonempty) {
    Label best = 0;
    double best_score = membership_score(probs, 0, calib, u);
    for (Label y = 1; y < calib.k; ++y) {
      const double s = membership_score(probs, y, calib, u);
      if (s < best_score) {
        best = y;
        best_score = s;
      }
    }
    members.push_back(best);
  }
  return members;
}

bool set_covers(std::span<const double> probs, Label y,
                const CalibrationResult& calib, std::optional<double> u) {
  if (probs.size() != static_cast<std::size_t>(calib.k)) {
    throw std::invalid_argument("probability row does not match calibrated k");
  }
  if (y < 0 || y >= calib.k) throw std::out_of_range("label outside [0, k)");
  return membership_score(probs, y, calib, u) <= calib.q;
}

double set_membership_threshold(const CalibrationResult& calib,
                                double mean_score) {
  if (calib.method != MethodKind::NRES_CP) {
    throw std::invalid_argument(
        "effective raw-score threshold only exists for corrected-score "
        "membership");
  }
  if (calib.epsilon >= 1.0) {
    throw std::invalid_argument("threshold rewrite is undefined at epsilon = 1");
  }
  return (calib.q - calib.epsilon * mean_score) / (1.0 - calib.epsilon);
}

int set_size(std::span<const double> probs, const CalibrationResult& calib,
             std::optional<double> u) {
  if (probs.size() != static_cast<std::size_t>(calib.k)) {
    throw std::invalid_argument("probability row does not match calibrated k");
  }
  int count = 0;
  for (Label y = 0; y < calib.k; ++y) {
    if (membership_score(probs, y, calib, u) <= calib.q) ++count;
  }
  return count;
}

}  // namespace noisycp
