#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noisycp/calibrate.hpp"
#include "noisycp/evaluate.hpp"
#include "noisycp/noise.hpp"
#include "noisycp/types.hpp"

namespace noisycp::reference {

// Slow, structurally different implementations used as oracles in tests and
// as the serial baseline in the benchmark. Nothing here is called by the
// library itself.

// APS by sorting classes in descending probability and accumulating until
// the target class (and its ties) are consumed.
double aps_score_sorted(std::span<const double> probs, Label y);

// Randomized APS the same way: strict-greater mass plus u times the class
// probability.
double rand_aps_score_sorted(std::span<const double> probs, Label y, double u);

// Conformal quantile by full sort and 1-based indexing.
double conformal_quantile_sorted(std::span<const double> scores, double alpha);

// Conformal quantile by counting, no sort: the smallest value v such that
// at least m scores are <= v.
double conformal_quantile_counting(std::span<const double> scores, double alpha);

// Noise-corrected score via the explicit posterior sum
//   sum_i P(clean = i | observed) * score(x, i)
// instead of the two-term shortcut.
double robust_score_posterior(std::span<const double> probs, Label observed,
                              const NoiseModel& model, const ScoreSpec& spec,
                              std::optional<double> u = std::nullopt);

// Corrected-score membership via the equivalent raw-score threshold
//   score(x, y) <= (q - epsilon * mean_score) / (1 - epsilon).
// Valid for epsilon < 1.
bool nres_covers_threshold_form(std::span<const double> probs, Label y,
                                const CalibrationResult& calib,
                                std::optional<double> u = std::nullopt);

// Plain serial loop over splits, same per-split seeds as the parallel
// harness. The benchmark compares the two for equality and speed.
SplitTable run_repeated_splits_serial(const LabeledPool& pool,
                                      const SplitConfig& config);

}  // namespace noisycp::reference
