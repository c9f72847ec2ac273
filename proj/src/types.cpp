#include "noisycp/types.hpp"

#include <cmath>
#include <stdexcept>

namespace noisycp {

void validate(const ScoreSpec& spec) {
  if (spec.kind == ScoreKind::RAPS) {
    if (!(std::isfinite(spec.raps_a) && spec.raps_a >= 0.0)) {
      throw std::invalid_argument("raps penalty a must be finite and >= 0");
    }
    if (!(std::isfinite(spec.raps_b) && spec.raps_b >= 0.0)) {
      throw std::invalid_argument("raps offset b must be finite and >= 0");
    }
  }
}

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::HPS: return "hps";
    case ScoreKind::APS: return "aps";
    case ScoreKind::RAPS: return "raps";
  }
  throw std::logic_error("unreachable score kind");
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "hps") return ScoreKind::HPS;
  if (name == "aps") return ScoreKind::APS;
  if (name == "raps") return ScoreKind::RAPS;
  throw std::invalid_argument("unknown score kind: " + name);
}

void validate(const NoiseModel& model) {
  if (model.k < 2) {
    throw std::invalid_argument("noise model needs k >= 2 classes");
  }
  if (!(std::isfinite(model.epsilon) && model.epsilon >= 0.0 &&
        model.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
}

std::string to_string(MethodKind method) {
  switch (method) {
    case MethodKind::ORACLE_CP: return "oracle_cp";
    case MethodKind::NOISY_CP: return "noisy_cp";
    case MethodKind::NRES_CP: return "nres_cp";
    case MethodKind::NR_CP: return "nr_cp";
  }
  throw std::logic_error("unreachable method kind");
}

MethodKind method_from_string(const std::string& name) {
  if (name == "oracle_cp") return MethodKind::ORACLE_CP;
  if (name == "noisy_cp") return MethodKind::NOISY_CP;
  if (name == "nres_cp") return MethodKind::NRES_CP;
  if (name == "nr_cp") return MethodKind::NR_CP;
  throw std::invalid_argument("unknown method: " + name);
}

}  // namespace noisycp
