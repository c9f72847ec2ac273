#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noisycp/calibrate.hpp"
#include "noisycp/dataset.hpp"
#include "noisycp/evaluate.hpp"
#include "noisycp/synthetic.hpp"
#include "noisycp/types.hpp"

namespace noisycp {

// Seed streams. Repeated splits use derive_seed(master_seed, split_index);
// everything else gets a stream tag from the top of the range so the two can
// never collide.
inline constexpr std::uint64_t kSynthPoolStream = ~std::uint64_t{0};
inline constexpr std::uint64_t kCalibrateStream = ~std::uint64_t{1};
inline constexpr std::uint64_t kPredictStream = ~std::uint64_t{2};
inline constexpr std::uint64_t kSynthCorruptStream = ~std::uint64_t{3};

struct SplitsSpec {
  std::size_t n_splits = 1000;
  double calib_fraction = 0.5;
};

// One experiment description, read from a JSON config file. Exactly one of
// dataset / synth must be present. Unknown keys are rejected. epsilon is
// mandatory whenever a noise-corrected method is requested.
struct RunConfig {
  std::optional<std::string> dataset;
  std::optional<SyntheticConfig> synth;
  double alpha = 0.1;
  std::optional<double> epsilon;
  ScoreSpec score;
  std::vector<MethodKind> methods;  // empty means all four
  SplitsSpec splits;
  std::optional<std::vector<double>> eps_grid;  // sweep only
  std::uint64_t master_seed = 0;
  std::optional<std::string> output;
  bool force_nonempty = false;
};

void validate(const RunConfig& config);

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Materializes the configured pool: reads the CSV (optionally through the
// softmax for raw-score files) or generates the synthetic data with
// derive_seed(master_seed, kSynthPoolStream).
LabeledPool load_pool(const RunConfig& config, bool softmax_rows = false);

std::vector<MethodKind> effective_methods(const RunConfig& config);
double effective_epsilon(const RunConfig& config);

// Noise-corrected methods cannot run without a configured noise level;
// methods that never read it may.
void require_epsilon_for_noise_methods(const RunConfig& config);

SplitConfig split_config_from(const RunConfig& config);

// CalibrationResult <-> JSON. q is a number, or the string "+inf" when the
// threshold is infinite.
std::string calibration_to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(const std::string& json_text);

// Experiment report: a JSON document embedding the resolved config (so the
// artifact is reproducible from its own metadata) and one row per method
// with mean/std of coverage, size and threshold, the empty-set rate, and
// the threshold shown as a percentage as well.
std::string experiment_report_json(const RunConfig& config,
                                   const std::vector<MethodStats>& stats);

// The same per-method rows for every sweep epsilon.
std::string sweep_report_json(const RunConfig& config,
                              const std::vector<SweepBlock>& blocks);

// Flat CSVs for plotting. All floats go through format_double.
std::string experiment_report_csv(const std::vector<MethodStats>& stats);
std::string sweep_report_csv(const std::vector<SweepBlock>& blocks);

// One row per (split, method): the raw table behind the aggregates.
std::string raw_split_csv(const SplitTable& table);

// One line per sample: sample_index,set_size,members with members joined by
// ';'. Randomized scores draw one u per sample from a stream derived from
// test_seed.
std::string predict_report_csv(const LabeledPool& pool,
                               const CalibrationResult& calib,
                               bool force_nonempty, std::uint64_t test_seed);

}  // namespace noisycp
