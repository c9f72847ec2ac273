#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisycp/dataset.hpp"
#include "noisycp/noise.hpp"
#include "noisycp/rng.hpp"
#include "noisycp/scores.hpp"
#include "noisycp/types.hpp"

namespace noisycp {

inline constexpr double kInfThreshold = std::numeric_limits<double>::infinity();

// Finite-sample conformal quantile: the m-th smallest of n scores with
// m = ceil((n + 1) * (1 - alpha)), or +inf when m > n. Rejects empty input
// and does not modify its argument.
double conformal_quantile(std::span<const double> scores, double alpha);

// Index m (1-based) picked by conformal_quantile. Exposed so callers can
// reason about the m > n degenerate case.
std::size_t conformal_quantile_index(std::size_t n, double alpha);

void validate_alpha(double alpha);

// Everything a calibration run produces. q may be +inf.
struct CalibrationResult {
  MethodKind method = MethodKind::NOISY_CP;
  double q = kInfThreshold;
  double alpha = 0.0;
  std::size_t n = 0;   // calibration pool size
  double epsilon = 0.0;
  int k = 0;
  ScoreSpec score;
  std::uint64_t seed = 0;  // randomization stream seed, recorded as passed
};

// Scores one calibration pool for `method` and returns its conformal
// threshold.
//   ORACLE_CP uses clean labels and the raw score,
//   NOISY_CP  uses observed labels and the raw score,
//   NRES_CP and NR_CP use observed labels and the noise-corrected score
//   (their learning phases are identical; they differ at prediction time).
// Randomized scores draw one u per sample from a stream seeded with `seed`;
// deterministic scores never touch it. ORACLE_CP requires pool.clean.
CalibrationResult calibrate(const LabeledPool& pool, MethodKind method,
                            double alpha, const NoiseModel& noise,
                            const ScoreSpec& spec, std::uint64_t seed = 0);

// Per-sample calibration scores for `method`, in pool order. calibrate() is
// conformal_quantile over exactly this vector.
std::vector<double> calibration_scores(const LabeledPool& pool, MethodKind method,
                                       const NoiseModel& noise,
                                       const ScoreSpec& spec, Rng* rng);

// Membership rule for one test sample, driven by calib.method: NRES_CP
// compares the corrected score of each candidate class against q; every
// other method compares its raw score. Randomized scores reuse one u for all
// classes of a sample. force_nonempty inserts the single best-scoring class
// when the set comes out empty. Returns ascending class labels.
std::vector<Label> prediction_set(std::span<const double> probs,
                                  const CalibrationResult& calib,
                                  std::optional<double> u = std::nullopt,
                                  bool force_nonempty = false);

// True when the prediction set of `calib` at this sample contains y.
bool set_covers(std::span<const double> probs, Label y,
                const CalibrationResult& calib,
                std::optional<double> u = std::nullopt);

// The per-sample raw-score threshold equivalent to corrected-score
// membership: (q - epsilon * mean_score) / (1 - epsilon). Only meaningful
// for NRES_CP; rejects epsilon = 1 (production membership uses the direct
// corrected-score form and never divides).
double set_membership_threshold(const CalibrationResult& calib,
                                double mean_score);

// Set size without materializing the set.
int set_size(std::span<const double> probs, const CalibrationResult& calib,
             std::optional<double> u = std::nullopt);

}  // namespace noisycp
