#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noisycp/rng.hpp"
#include "noisycp/types.hpp"

namespace noisycp {

// Uniform label noise: with probability epsilon the label is redrawn
// uniformly from all k classes (the redraw may land on the original), so
//   P(observed = j | clean = i) = (1 - epsilon) * 1{i == j} + epsilon / k.

// Single transition probability P(observed = j | clean = i).
double flip_probability(const NoiseModel& model, Label clean, Label observed);

// Full k x k transition matrix, row-major, rows indexed by the clean label.
std::vector<double> transition_matrix(const NoiseModel& model);

// Applies one corruption draw to a clean label.
Label corrupt_label(Label clean, const NoiseModel& model, Rng& rng);

// Corrupts a whole label vector in place order, one rng draw pair per entry.
std::vector<Label> corrupt_labels(std::span<const Label> clean,
                                  const NoiseModel& model, Rng& rng);

// Same, with the stream seeded here; bit-reproducible given the seed.
std::vector<Label> corrupt_labels(std::span<const Label> clean,
                                  const NoiseModel& model, std::uint64_t seed);

// Posterior P(clean = i | observed) under a uniform prior over classes:
// (1 - epsilon) + epsilon / k at the observed label, epsilon / k elsewhere.
void posterior_true_label(const NoiseModel& model, Label observed,
                          std::span<double> out);
std::vector<double> posterior_true_label(const NoiseModel& model, Label observed);

// Expected clean score of an observed label:
//   (1 - epsilon) * score(x, observed) + epsilon * mean_class_score(x).
// Algebraically identical to summing the posterior against all class scores.
double robust_score(std::span<const double> probs, Label observed,
                    const NoiseModel& model, const ScoreSpec& spec,
                    std::optional<double> u = std::nullopt);

// The same correction applied to an already-computed pair
// (score at observed label, mean class score).
double robust_from_parts(double observed_score, double mean_score,
                         const NoiseModel& model);

}  // namespace noisycp
