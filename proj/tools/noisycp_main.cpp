// noisycp: conformal prediction calibrated on noisy-labeled validation data.
//
// Subcommands: calibrate, predict, experiment, sweep, synth. Every run is
// described by a JSON config file and/or command-line flags; explicit flags
// override config-file values. Exit codes: 0 success, 1 invalid input,
// 2 runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisycp/config.hpp"
#include "noisycp/noise.hpp"

namespace {

using namespace noisycp;

struct CommonOpts {
  std::string config_path;
  std::string dataset;
  std::uint64_t synth_n = 0;
  std::uint64_t synth_k = 0;
  double synth_concentration = 0.0;
  double synth_temperature = 0.0;
  bool rank_breaking = false;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::string score_kind;
  double raps_a = 0.0;
  double raps_b = 0.0;
  bool randomized = false;
  std::vector<std::string> methods;
  std::uint64_t n_splits = 0;
  double calib_fraction = 0.0;
  std::vector<double> eps_grid;
  std::uint64_t master_seed = 0;
  std::string output;
  bool force_nonempty = false;
  bool softmax = false;
};

void add_common_options(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--dataset", o.dataset, "dataset CSV path");
  sub->add_option("--synth-n", o.synth_n, "synthetic sample count");
  sub->add_option("--synth-k", o.synth_k, "synthetic class count");
  sub->add_option("--synth-concentration", o.synth_concentration,
                  "synthetic class-distribution concentration");
  sub->add_option("--synth-temperature", o.synth_temperature,
                  "synthetic model temperature");
  sub->add_flag("--rank-breaking", o.rank_breaking,
                "reverse synthetic model vectors (negative control)");
  sub->add_option("--alpha", o.alpha, "miscoverage level in (0, 1)");
  sub->add_option("--epsilon", o.epsilon, "label noise level in [0, 1)");
  sub->add_option("--score", o.score_kind, "score kind: hps, aps, raps");
  sub->add_option("--raps-a", o.raps_a, "rank penalty weight");
  sub->add_option("--raps-b", o.raps_b, "rank penalty offset");
  sub->add_flag("--randomized", o.randomized, "use the randomized score");
  sub->add_option("--methods", o.methods,
                  "methods: oracle_cp, noisy_cp, nres_cp, nr_cp")
      ->delimiter(',');
  sub->add_option("--n-splits", o.n_splits, "number of repeated splits");
  sub->add_option("--calib-fraction", o.calib_fraction,
                  "calibration share of each split, in (0, 1)");
  sub->add_option("--eps-grid", o.eps_grid, "sweep noise levels")->delimiter(',');
  sub->add_option("--master-seed", o.master_seed, "seed every stream derives from");
  sub->add_option("--output", o.output, "output file (stdout when omitted)");
  sub->add_flag("--force-nonempty", o.force_nonempty,
                "put the best class into otherwise-empty prediction sets");
  sub->add_flag("--softmax", o.softmax,
                "treat dataset probability columns as raw scores and normalize");
}

RunConfig build_config(const CLI::App* sub, const CommonOpts& o) {
  RunConfig config;
  if (sub->count("--config")) config = load_run_config(o.config_path);

  if (sub->count("--dataset")) {
    config.dataset = o.dataset;
    config.synth.reset();
  }
  const bool any_synth = sub->count("--synth-n") || sub->count("--synth-k") ||
                         sub->count("--synth-concentration") ||
                         sub->count("--synth-temperature") ||
                         sub->count("--rank-breaking");
  if (any_synth) {
    if (!config.synth) config.synth.emplace();
    if (sub->count("--synth-n")) {
      config.synth->n = static_cast<std::size_t>(o.synth_n);
    }
    if (sub->count("--synth-k")) config.synth->k = static_cast<int>(o.synth_k);
    if (sub->count("--synth-concentration")) {
      config.synth->concentration = o.synth_concentration;
    }
    if (sub->count("--synth-temperature")) {
      config.synth->temperature = o.synth_temperature;
    }
    if (sub->count("--rank-breaking")) config.synth->rank_breaking = true;
    config.dataset.reset();
  }
  if (sub->count("--alpha")) config.alpha = o.alpha;
  if (sub->count("--epsilon")) config.epsilon = o.epsilon;
  if (sub->count("--score")) {
    config.score.kind = score_kind_from_string(o.score_kind);
  }
  if (sub->count("--raps-a")) config.score.raps_a = o.raps_a;
  if (sub->count("--raps-b")) config.score.raps_b = o.raps_b;
  if (sub->count("--randomized")) config.score.randomized = true;
  if (sub->count("--methods")) {
    config.methods.clear();
    for (const auto& name : o.methods) {
      config.methods.push_back(method_from_string(name));
    }
  }
  if (sub->count("--n-splits")) {
    config.splits.n_splits = static_cast<std::size_t>(o.n_splits);
  }
  if (sub->count("--calib-fraction")) {
    config.splits.calib_fraction = o.calib_fraction;
  }
  if (sub->count("--eps-grid")) config.eps_grid = o.eps_grid;
  if (sub->count("--master-seed")) config.master_seed = o.master_seed;
  if (sub->count("--output")) config.output = o.output;
  if (sub->count("--force-nonempty")) config.force_nonempty = true;
  validate(config);
  return config;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit(const std::string& text, const std::optional<std::string>& path) {
  if (path) {
    write_text_atomic(*path, text);
  } else {
    std::cout << text;
  }
}

int cmd_calibrate(const RunConfig& config, bool softmax) {
  const auto methods = effective_methods(config);
  if (methods.size() != 1) {
    throw std::invalid_argument(
        "calibrate needs exactly one method (pass --methods or set 'methods' "
        "in the config)");
  }
  require_epsilon_for_noise_methods(config);
  const auto pool = load_pool(config, softmax);
  const NoiseModel noise{effective_epsilon(config), pool.k()};
  const auto result =
      calibrate(pool, methods.front(), config.alpha, noise, config.score,
                derive_seed(config.master_seed, kCalibrateStream));
  emit(calibration_to_json(result), config.output);
  return 0;
}

int cmd_predict(const RunConfig& config, const std::string& calibration_path,
                std::uint64_t test_seed, bool softmax) {
  const auto calib = calibration_from_json(read_text_file(calibration_path));
  const auto pool = load_pool(config, softmax);
  emit(predict_report_csv(pool, calib, config.force_nonempty, test_seed),
       config.output);
  return 0;
}

int cmd_experiment(const RunConfig& config, const std::string& csv_path,
                   const std::string& raw_path, bool softmax) {
  require_epsilon_for_noise_methods(config);
  const auto pool = load_pool(config, softmax);
  const auto split = split_config_from(config);
  const auto table = run_repeated_splits(pool, split);
  const auto stats = aggregate(table);
  emit(experiment_report_json(config, stats), config.output);
  if (!csv_path.empty()) {
    write_text_atomic(csv_path, experiment_report_csv(stats));
  }
  if (!raw_path.empty()) {
    write_text_atomic(raw_path, raw_split_csv(table));
  }
  return 0;
}

int cmd_sweep(const RunConfig& config, const std::string& csv_path,
              bool softmax) {
  if (!config.eps_grid) {
    throw std::invalid_argument(
        "sweep needs an epsilon grid (pass --eps-grid or set 'sweep.eps_grid')");
  }
  const auto pool = load_pool(config, softmax);
  const auto base = split_config_from(config);
  const auto blocks = run_sweep(pool, base, *config.eps_grid);
  emit(sweep_report_json(config, blocks), config.output);
  if (!csv_path.empty()) {
    write_text_atomic(csv_path, sweep_report_csv(blocks));
  }
  return 0;
}

int cmd_synth(const RunConfig& config, bool corrupt) {
  if (!config.synth) {
    throw std::invalid_argument(
        "synth needs a synthetic block (pass --synth-n or set 'synth')");
  }
  auto pool = generate_pool(*config.synth,
                            derive_seed(config.master_seed, kSynthPoolStream));
  if (corrupt) {
    if (!config.epsilon) {
      throw std::invalid_argument("--corrupt needs an epsilon");
    }
    const NoiseModel noise{*config.epsilon, pool.k()};
    pool.observed = corrupt_labels(
        *pool.clean, noise, derive_seed(config.master_seed, kSynthCorruptStream));
    pool.noise = noise;
  }
  emit(dataset_to_csv(pool), config.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Conformal prediction sets calibrated on noisy-labeled validation data"};
  app.set_version_flag("--version", "noisycp 1.0.0");
  app.require_subcommand(1);

  CommonOpts cal_opts, pred_opts, exp_opts, sweep_opts, synth_opts;
  std::string calibration_path;
  std::uint64_t test_seed = 0;
  std::string exp_csv, exp_raw, sweep_csv;
  bool synth_corrupt = false;

  auto* cal = app.add_subcommand(
      "calibrate", "Compute a conformal threshold from a labeled pool");
  add_common_options(cal, cal_opts);

  auto* pred = app.add_subcommand(
      "predict", "Emit per-sample prediction sets for a calibrated threshold");
  add_common_options(pred, pred_opts);
  pred->add_option("--calibration", calibration_path,
                   "calibration JSON produced by 'calibrate'")
      ->required();
  pred->add_option("--test-seed", test_seed,
                   "seed for test-time randomization draws");

  auto* exp = app.add_subcommand(
      "experiment", "Repeated-split evaluation of the configured methods");
  add_common_options(exp, exp_opts);
  exp->add_option("--csv", exp_csv, "also write the aggregate table as CSV");
  exp->add_option("--raw", exp_raw, "also write the per-split raw table as CSV");

  auto* sweep = app.add_subcommand(
      "sweep", "Repeated-split evaluation across a grid of noise levels");
  add_common_options(sweep, sweep_opts);
  sweep->add_option("--csv", sweep_csv, "also write the long-form table as CSV");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
  add_common_options(synth, synth_opts);
  synth->add_flag("--corrupt", synth_corrupt,
                  "corrupt the emitted labels at the configured epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cal->parsed()) {
      return cmd_calibrate(build_config(cal, cal_opts), cal_opts.softmax);
    }
    if (pred->parsed()) {
      return cmd_predict(build_config(pred, pred_opts), calibration_path,
                         test_seed, pred_opts.softmax);
    }
    if (exp->parsed()) {
      return cmd_experiment(build_config(exp, exp_opts), exp_csv, exp_raw,
                            exp_opts.softmax);
    }
    if (sweep->parsed()) {
      return cmd_sweep(build_config(sweep, sweep_opts), sweep_csv,
                       sweep_opts.softmax);
    }
    if (synth->parsed()) {
      return cmd_synth(build_config(synth, synth_opts), synth_corrupt);
    }
    throw std::logic_error("no subcommand dispatched");
  } catch (const std::invalid_argument& e) {
    std::cerr << "noisycp: error: invalid-input: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "noisycp: error: invalid-input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "noisycp: error: runtime: " << e.what() << '\n';
    return 2;
  }
}
