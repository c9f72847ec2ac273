#include "noisycp/noise.hpp"

#include <stdexcept>

#include "noisycp/scores.hpp"

namespace noisycp {

double flip_probability(const NoiseModel& model, Label clean, Label observed) {
  validate(model);
  if (clean < 0 || clean >= model.k || observed < 0 || observed >= model.k) {
    throw std::out_of_range("label outside [0, k)");
  }
  const double uniform_part = model.epsilon / static_cast<double>(model.k);
  return (clean == observed) ? (1.0 - model.epsilon) + uniform_part
                             : uniform_part;
}

std::vector<double> transition_matrix(const NoiseModel& model) {
  validate(model);
  const auto k = static_cast<std::size_t>(model.k);
  std::vector<double> matrix(k * k, model.epsilon / static_cast<double>(model.k));
  for (std::size_t i = 0; i < k; ++i) {
    matrix[i * k + i] += 1.0 - model.epsilon;
  }
  return matrix;
}

Label corrupt_label(Label clean, const NoiseModel& model, Rng& rng) {
  // Two draws per label, taken unconditionally so the stream position does
  // not depend on the data.
  const double flip = rng.uniform01();
  const auto redraw = static_cast<Label>(
      rng.uniform_below(static_cast<std::uint64_t>(model.k)));
  return flip < model.epsilon ? redraw : clean;
}

std::vector<Label> corrupt_labels(std::span<const Label> clean,
                                  const NoiseModel& model, Rng& rng) {
  validate(model);
  std::vector<Label> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (clean[i] < 0 || clean[i] >= model.k) {
      throw std::out_of_range("label outside [0, k)");
    }
    out[i] = corrupt_label(clean[i], model, rng);
  }
  return out;
}

std::vector<Label> corrupt_labels(std::span<const Label> clean,
                                  const NoiseModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return corrupt_labels(clean, model, rng);
}

void posterior_true_label(const NoiseModel& model, Label observed,
                          std::span<double> out) {
  validate(model);
  if (out.size() != static_cast<std::size_t>(model.k)) {
    throw std::invalid_argument("posterior needs one slot per class");
  }
  if (observed < 0 || observed >= model.k) {
    throw std::out_of_range("label outside [0, k)");
  }
  const double uniform_part = model.epsilon / static_cast<double>(model.k);
  for (auto& p : out) p = uniform_part;
  out[static_cast<std::size_t>(observed)] += 1.0 - model.epsilon;
}

std::vector<double> posterior_true_label(const NoiseModel& model, Label observed) {
  std::vector<double> out(static_cast<std::size_t>(model.k));
  posterior_true_label(model, observed, out);
  return out;
}

double robust_score(std::span<const double> probs, Label observed,
                    const NoiseModel& model, const ScoreSpec& spec,
                    std::optional<double> u) {
  validate(model);
  if (probs.size() != static_cast<std::size_t>(model.k)) {
    throw std::invalid_argument("probability row does not match model k");
  }
  const double own = class_score(probs, observed, spec, u);
  const double mean = mean_class_score(probs, spec, u);
  return robust_from_parts(own, mean, model);
}

double robust_from_parts(double observed_score, double mean_score,
                         const NoiseModel& model) {
  return (1.0 - model.epsilon) * observed_score + model.epsilon * mean_score;
}

}  // namespace noisycp
