#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "noisycp/calibrate.hpp"
#include "noisycp/dataset.hpp"
#include "noisycp/types.hpp"

namespace noisycp {

// Repeated random-split evaluation. Every split shuffles the pool, corrupts
// the calibration labels (unless the pool arrived already corrupted),
// calibrates each requested method on the first part and measures it on the
// rest against the clean labels.
struct SplitConfig {
  std::size_t n_splits = 1000;
  double calib_fraction = 0.5;
  double alpha = 0.1;
  double epsilon = 0.0;
  ScoreSpec score;
  std::vector<MethodKind> methods;
  std::uint64_t master_seed = 0;
  bool force_nonempty = false;
  // Measure coverage against freshly corrupted test labels instead of clean
  // ones. Not part of the config file surface; tests use it to check what
  // guarantee the uncorrected method actually has.
  bool eval_on_noisy_test = false;
};

void validate(const SplitConfig& config, const LabeledPool& pool);

// floor(n * calib_fraction), clamped to [1, n - 1].
std::size_t calib_size(std::size_t n, double calib_fraction);

// Plain set metrics: mean cardinality, fraction of sets holding their label,
// fraction of empty sets.
struct SetMetrics {
  double avg_size = 0.0;
  double coverage = 0.0;
  double empty_rate = 0.0;
};

SetMetrics evaluate_sets(std::span<const std::vector<Label>> sets,
                         std::span<const Label> labels);

// One method's numbers from one split.
struct SplitOutcome {
  double coverage = 0.0;
  double avg_size = 0.0;
  double empty_rate = 0.0;
  double q = 0.0;  // calibrated threshold (may be +inf)
};

// Per-split results for every requested method, methods indexed as in
// SplitConfig::methods.
struct SplitTable {
  std::vector<MethodKind> methods;
  std::vector<std::vector<SplitOutcome>> by_method;  // [method][split]
};

// Mean and sample standard deviation (ddof = 1; 0 when there is one value).
struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

struct MethodStats {
  MethodKind method = MethodKind::NOISY_CP;
  Moments coverage;
  Moments avg_size;
  Moments empty_rate;
  Moments q;                         // over splits with a finite threshold
  double infinite_q_fraction = 0.0;  // share of splits whose threshold was +inf
};

// Deterministic at any thread count: split j always uses
// derive_seed(master_seed, j) and results land in preassigned slots. Splits
// run in parallel when OpenMP is enabled; the NOISY_CP_THREADS environment
// variable (0 or unset = all cores) caps the team size.
SplitTable run_repeated_splits(const LabeledPool& pool, const SplitConfig& config);

// Single split body, exposed for the serial reference and for tests.
// split_seed should be derive_seed(master_seed, split_index).
std::vector<SplitOutcome> evaluate_split(const LabeledPool& pool,
                                         const SplitConfig& config,
                                         std::uint64_t split_seed);

std::vector<MethodStats> aggregate(const SplitTable& table);

Moments moments(std::span<const double> values);

// Noise-level sweep: every epsilon runs the full repeated-split protocol
// with the same master seed.
struct SweepBlock {
  double epsilon = 0.0;
  std::vector<MethodStats> stats;
};

std::vector<SweepBlock> run_sweep(const LabeledPool& pool,
                                  const SplitConfig& base,
                                  std::span<const double> eps_grid);

// Effective OpenMP team size after the NOISY_CP_THREADS cap.
int planned_thread_count();

}  // namespace noisycp
