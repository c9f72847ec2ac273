#pragma once

#include <cstdint>
#include <string>

namespace noisycp {

// Class index into a k-class probability vector.
using Label = int;

enum class ScoreKind { HPS, APS, RAPS };

// Which conformal score to evaluate. raps_a / raps_b are the set-size
// penalty weight and offset and only apply to RAPS; `randomized` selects
// the randomized variant driven by one uniform draw u per sample.
struct ScoreSpec {
  ScoreKind kind = ScoreKind::APS;
  double raps_a = 0.1;
  double raps_b = 2.0;
  bool randomized = false;
};

void validate(const ScoreSpec& spec);

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

// Uniform label-noise model: with probability epsilon the observed label is
// redrawn uniformly from all k classes (the redraw may hit the original
// class, so the effective flip rate is epsilon*(k-1)/k).
struct NoiseModel {
  double epsilon = 0.0;
  int k = 2;
};

void validate(const NoiseModel& model);

enum class MethodKind { ORACLE_CP, NOISY_CP, NRES_CP, NR_CP };

std::string to_string(MethodKind method);
MethodKind method_from_string(const std::string& name);

}  // namespace noisycp
