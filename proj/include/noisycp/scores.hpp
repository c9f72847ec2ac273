#pragma once

#include <optional>
#include <span>

#include "noisycp/types.hpp"

namespace noisycp {

// Nonconformity scores. Smaller is better everywhere; prediction sets are
// sublevel sets {y : score(x, y) <= q}.

// 1 - p_y.
double hps_score(std::span<const double> probs, Label y);

// Sum of all p_i with p_i >= p_y (ties included, so the class itself always
// contributes).
double aps_score(std::span<const double> probs, Label y);

// Number of classes i with p_i >= p_y: the rank of y counting from the top,
// ties counted in full.
int aps_rank(std::span<const double> probs, Label y);

// aps_score plus the regularizer a * max(0, rank - b).
double raps_score(std::span<const double> probs, Label y, const ScoreSpec& spec);

// Randomized variant at uniform draw u in [0, 1]:
//   HPS  stays hps_score (no randomization to apply),
//   APS  is sum_{p_i > p_y} p_i + u * p_y,
//   RAPS adds the deterministic rank penalty on top of randomized APS.
double rand_score(std::span<const double> probs, Label y, double u,
                  const ScoreSpec& spec);

// Dispatch on spec.kind / spec.randomized. u must be supplied exactly when
// spec.randomized is set; throws std::invalid_argument otherwise.
double class_score(std::span<const double> probs, Label y, const ScoreSpec& spec,
                   std::optional<double> u = std::nullopt);

// Fills out[i] with class_score(probs, i, spec, u). Element i is computed by
// the same code path as the single-class call, so the two agree bitwise.
void score_all_classes(std::span<const double> probs, const ScoreSpec& spec,
                       std::optional<double> u, std::span<double> out);

// Mean of class_score over all k classes, accumulated in ascending class
// order. This is the score-side ingredient of the noise correction.
double mean_class_score(std::span<const double> probs, const ScoreSpec& spec,
                        std::optional<double> u = std::nullopt);

}  // namespace noisycp
