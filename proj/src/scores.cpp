#include "noisycp/scores.hpp"

#include <stdexcept>

namespace noisycp {
namespace {

void check_label(std::span<const double> probs, Label y) {
  if (y < 0 || static_cast<std::size_t>(y) >= probs.size()) {
    throw std::out_of_range("class label out of range");
  }
}

void check_u(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("randomization draw must lie in [0, 1]");
  }
}

}  // namespace

double hps_score(std::span<const double> probs, Label y) {
  check_label(probs, y);
  return 1.0 - probs[static_cast<std::size_t>(y)];
}

double aps_score(std::span<const double> probs, Label y) {
  check_label(probs, y);
  const double py = probs[static_cast<std::size_t>(y)];
  double total = 0.0;
  for (double p : probs) {
    if (p >= py) total += p;
  }
  return total;
}

int aps_rank(std::span<const double> probs, Label y) {
  check_label(probs, y);
  const double py = probs[static_cast<std::size_t>(y)];
  int rank = 0;
  for (double p : probs) {
    if (p >= py) ++rank;
  }
  return rank;
}

double raps_score(std::span<const double> probs, Label y, const ScoreSpec& spec) {
  const double base = aps_score(probs, y);
  const double excess = static_cast<double>(aps_rank(probs, y)) - spec.raps_b;
  return base + spec.raps_a * (excess > 0.0 ? excess : 0.0);
}

double rand_score(std::span<const double> probs, Label y, double u,
                  const ScoreSpec& spec) {
  check_label(probs, y);
  check_u(u);
  if (spec.kind == ScoreKind::HPS) {
    return hps_score(probs, y);
  }
  const double py = probs[static_cast<std::size_t>(y)];
  double strict = 0.0;
  for (double p : probs) {
    if (p > py) strict += p;
  }
  double s = strict + u * py;
  if (spec.kind == ScoreKind::RAPS) {
    const double excess = static_cast<double>(aps_rank(probs, y)) - spec.raps_b;
    s += spec.raps_a * (excess > 0.0 ? excess : 0.0);
  }
  return s;
}

double class_score(std::span<const double> probs, Label y, const ScoreSpec& spec,
                   std::optional<double> u) {
  if (spec.randomized != u.has_value()) {
    throw std::invalid_argument(
        spec.randomized ? "randomized score needs a uniform draw"
                        : "deterministic score takes no uniform draw");
  }
  if (spec.randomized) {
    return rand_score(probs, y, *u, spec);
  }
  switch (spec.kind) {
    case ScoreKind::HPS: return hps_score(probs, y);
    case ScoreKind::APS: return aps_score(probs, y);
    case ScoreKind::RAPS: return raps_score(probs, y, spec);
  }
  throw std::logic_error("unreachable score kind");
}

void score_all_classes(std::span<const double> probs, const ScoreSpec& spec,
                       std::optional<double> u, std::span<double> out) {
  if (out.size() != probs.size()) {
    throw std::invalid_argument("output span must have one slot per class");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = class_score(probs, static_cast<Label>(i), spec, u);
  }
}

double mean_class_score(std::span<const double> probs, const ScoreSpec& spec,
                        std::optional<double> u) {
  if (probs.empty()) {
    throw std::invalid_argument("cannot average scores over zero classes");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += class_score(probs, static_cast<Label>(i), spec, u);
  }
  return total / static_cast<double>(probs.size());
}

}  // namespace noisycp
