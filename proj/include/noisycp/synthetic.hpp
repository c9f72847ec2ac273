#pragma once

#include <cstdint>

#include "noisycp/dataset.hpp"
#include "noisycp/rng.hpp"
#include "noisycp/types.hpp"

namespace noisycp {

// Synthetic classification pools. Each sample draws a true class
// distribution from a symmetric Dirichlet(concentration), a clean label from
// that distribution, and a model probability vector that is the true one
// sharpened or flattened by a power transform:
//   model_i ∝ true_i^(1 / temperature).
// temperature == 1 reproduces the truth exactly (a perfectly calibrated
// model); larger temperatures flatten, smaller sharpen. The transform never
// reorders classes. rank_breaking reverses each model vector instead, a
// deliberately wrong model for negative controls.
struct SyntheticConfig {
  int k = 8;
  std::size_t n = 0;
  double concentration = 0.4;
  double temperature = 1.0;
  bool rank_breaking = false;
};

void validate(const SyntheticConfig& config);

// Clean pool: observed == clean, no noise metadata, true_probs kept.
LabeledPool generate_pool(const SyntheticConfig& config, std::uint64_t seed);

// One Dirichlet(concentration, ..., concentration) draw into out.
void dirichlet_row(double concentration, Rng& rng, std::span<double> out);

// Applies the temperature transform (or the rank-breaking reversal) of
// `config` to one true row.
void model_row_from_true(const SyntheticConfig& config,
                         std::span<const double> true_row,
                         std::span<double> out);

Label sample_label(std::span<const double> probs, Rng& rng);

}  // namespace noisycp
