#include "noisycp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace noisycp {

void validate(const SyntheticConfig& config) {
  if (config.k < 2) throw std::invalid_argument("synthetic data needs k >= 2");
  if (config.n == 0) throw std::invalid_argument("synthetic data needs n >= 1");
  if (!(std::isfinite(config.concentration) && config.concentration > 0.0)) {
    throw std::invalid_argument("concentration must be positive");
  }
  if (!(std::isfinite(config.temperature) && config.temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
}

void dirichlet_row(double concentration, Rng& rng, std::span<double> out) {
  double sum = 0.0;
  for (auto& x : out) {
    x = rng.gamma(concentration);
    sum += x;
  }
  // Gamma draws are positive with probability 1; guard the measure-zero
  // underflow case by falling back to uniform.
  if (!(sum > 0.0)) {
    for (auto& x : out) x = 1.0 / static_cast<double>(out.size());
    return;
  }
  for (auto& x : out) x /= sum;
}

void model_row_from_true(const SyntheticConfig& config,
                         std::span<const double> true_row,
                         std::span<double> out) {
  if (out.size() != true_row.size()) {
    throw std::invalid_argument("model row width does not match true row");
  }
  if (config.rank_breaking) {
    std::reverse_copy(true_row.begin(), true_row.end(), out.begin());
    return;
  }
  if (config.temperature == 1.0) {
    std::copy(true_row.begin(), true_row.end(), out.begin());
    return;
  }
  const double inv_temp = 1.0 / config.temperature;
  double sum = 0.0;
  for (std::size_t i = 0; i < true_row.size(); ++i) {
    out[i] = std::pow(true_row[i], inv_temp);
    sum += out[i];
  }
  if (!(sum > 0.0)) {
    for (auto& x : out) x = 1.0 / static_cast<double>(out.size());
    return;
  }
  for (auto& x : out) x /= sum;
}

Label sample_label(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<Label>(i);
  }
  return static_cast<Label>(probs.size() - 1);
}

LabeledPool generate_pool(const SyntheticConfig& config, std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  const auto k = static_cast<std::size_t>(config.k);

  LabeledPool pool{ProbMatrix(config.k), {}, {}, {}, ProbMatrix(config.k)};
  pool.observed.reserve(config.n);
  pool.clean.emplace();
  pool.clean->reserve(config.n);

  std::vector<double> true_row(k);
  std::vector<double> model_row(k);
  for (std::size_t i = 0; i < config.n; ++i) {
    dirichlet_row(config.concentration, rng, true_row);
    const Label y = sample_label(true_row, rng);
    model_row_from_true(config, true_row, model_row);
    pool.true_probs->append_unchecked(true_row);
    pool.probs.append_unchecked(model_row);
    pool.observed.push_back(y);
    pool.clean->push_back(y);
  }
  return pool;
}

}  // namespace noisycp
