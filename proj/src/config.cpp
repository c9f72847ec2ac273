#include "noisycp/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace noisycp {
namespace {

using Json = nlohmann::ordered_json;

void reject_unknown_keys(const Json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double as_double(const Json& value, const std::string& where) {
  if (!value.is_number()) {
    throw std::invalid_argument(where + " must be a number");
  }
  return value.get<double>();
}

std::uint64_t as_u64(const Json& value, const std::string& where) {
  if (!value.is_number_unsigned()) {
    throw std::invalid_argument(where + " must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

bool as_bool(const Json& value, const std::string& where) {
  if (!value.is_boolean()) {
    throw std::invalid_argument(where + " must be a boolean");
  }
  return value.get<bool>();
}

std::string as_string(const Json& value, const std::string& where) {
  if (!value.is_string()) {
    throw std::invalid_argument(where + " must be a string");
  }
  return value.get<std::string>();
}

ScoreSpec parse_score(const Json& obj, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  reject_unknown_keys(obj, where, {"kind", "a", "b", "randomized"});
  ScoreSpec spec;
  if (obj.contains("kind")) {
    spec.kind = score_kind_from_string(as_string(obj["kind"], where + ".kind"));
  }
  if (obj.contains("a")) spec.raps_a = as_double(obj["a"], where + ".a");
  if (obj.contains("b")) spec.raps_b = as_double(obj["b"], where + ".b");
  if (obj.contains("randomized")) {
    spec.randomized = as_bool(obj["randomized"], where + ".randomized");
  }
  validate(spec);
  return spec;
}

SyntheticConfig parse_synth(const Json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("synth must be an object");
  reject_unknown_keys(obj, "synth",
                      {"k", "n", "concentration", "temperature", "rank_breaking"});
  if (!obj.contains("n")) throw std::invalid_argument("synth.n is required");
  SyntheticConfig config;
  config.n = static_cast<std::size_t>(as_u64(obj["n"], "synth.n"));
  if (obj.contains("k")) {
    config.k = static_cast<int>(as_u64(obj["k"], "synth.k"));
  }
  if (obj.contains("concentration")) {
    config.concentration = as_double(obj["concentration"], "synth.concentration");
  }
  if (obj.contains("temperature")) {
    config.temperature = as_double(obj["temperature"], "synth.temperature");
  }
  if (obj.contains("rank_breaking")) {
    config.rank_breaking = as_bool(obj["rank_breaking"], "synth.rank_breaking");
  }
  validate(config);
  return config;
}

Json score_to_json(const ScoreSpec& spec) {
  Json obj;
  obj["kind"] = to_string(spec.kind);
  obj["a"] = spec.raps_a;
  obj["b"] = spec.raps_b;
  obj["randomized"] = spec.randomized;
  return obj;
}

Json q_to_json(double q) {
  if (std::isinf(q)) return Json("+inf");
  return Json(q);
}

Json resolved_config_json(const RunConfig& config) {
  Json obj;
  if (config.dataset) obj["dataset"] = *config.dataset;
  if (config.synth) {
    Json synth;
    synth["k"] = config.synth->k;
    synth["n"] = config.synth->n;
    synth["concentration"] = config.synth->concentration;
    synth["temperature"] = config.synth->temperature;
    synth["rank_breaking"] = config.synth->rank_breaking;
    obj["synth"] = synth;
  }
  obj["alpha"] = config.alpha;
  if (config.epsilon) obj["epsilon"] = *config.epsilon;
  obj["score"] = score_to_json(config.score);
  Json methods = Json::array();
  for (MethodKind method : effective_methods(config)) {
    methods.push_back(to_string(method));
  }
  obj["methods"] = methods;
  Json splits;
  splits["n_splits"] = config.splits.n_splits;
  splits["calib_fraction"] = config.splits.calib_fraction;
  obj["splits"] = splits;
  if (config.eps_grid) {
    Json sweep;
    sweep["eps_grid"] = *config.eps_grid;
    obj["sweep"] = sweep;
  }
  obj["master_seed"] = config.master_seed;
  if (config.output) obj["output"] = *config.output;
  obj["force_nonempty"] = config.force_nonempty;
  return obj;
}

Json method_stats_json(const MethodStats& stats) {
  Json row;
  row["method"] = to_string(stats.method);
  row["mean_coverage"] = stats.coverage.mean;
  row["std_coverage"] = stats.coverage.std;
  row["mean_size"] = stats.avg_size.mean;
  row["std_size"] = stats.avg_size.std;
  row["mean_q"] = q_to_json(stats.q.mean);
  row["std_q"] = stats.q.std;
  row["mean_q_percent"] = q_to_json(stats.q.mean * 100.0);
  row["empty_rate"] = stats.empty_rate.mean;
  row["infinite_q_fraction"] = stats.infinite_q_fraction;
  return row;
}

std::string join_labels(const std::vector<Label>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(labels[i]);
  }
  return out;
}

bool needs_epsilon(const std::vector<MethodKind>& methods) {
  for (MethodKind method : methods) {
    if (method == MethodKind::NRES_CP || method == MethodKind::NR_CP) {
      return true;
    }
  }
  return false;
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.dataset.has_value() == config.synth.has_value()) {
    throw std::invalid_argument(
        "config must name exactly one of 'dataset' and 'synth'");
  }
  validate_alpha(config.alpha);
  if (config.epsilon &&
      !(std::isfinite(*config.epsilon) && *config.epsilon >= 0.0 &&
        *config.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
  validate(config.score);
  if (config.synth) validate(*config.synth);
  if (config.splits.n_splits == 0) {
    throw std::invalid_argument("splits.n_splits must be >= 1");
  }
  if (!(config.splits.calib_fraction > 0.0 && config.splits.calib_fraction < 1.0)) {
    throw std::invalid_argument("splits.calib_fraction must lie in (0, 1)");
  }
  if (config.eps_grid) {
    if (config.eps_grid->empty()) {
      throw std::invalid_argument("sweep.eps_grid must not be empty");
    }
    for (double eps : *config.eps_grid) {
      if (!(std::isfinite(eps) && eps >= 0.0 && eps < 1.0)) {
        throw std::invalid_argument("sweep.eps_grid entries must lie in [0, 1)");
      }
    }
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& err) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                err.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }
  reject_unknown_keys(root, "config",
                      {"dataset", "synth", "alpha", "epsilon", "score", "methods",
                       "splits", "sweep", "master_seed", "output",
                       "force_nonempty"});

  RunConfig config;
  if (root.contains("dataset")) {
    config.dataset = as_string(root["dataset"], "dataset");
  }
  if (root.contains("synth")) config.synth = parse_synth(root["synth"]);
  if (root.contains("alpha")) config.alpha = as_double(root["alpha"], "alpha");
  if (root.contains("epsilon")) {
    config.epsilon = as_double(root["epsilon"], "epsilon");
  }
  if (root.contains("score")) config.score = parse_score(root["score"], "score");
  if (root.contains("methods")) {
    const auto& arr = root["methods"];
    if (!arr.is_array()) throw std::invalid_argument("methods must be an array");
    for (const auto& entry : arr) {
      config.methods.push_back(method_from_string(as_string(entry, "methods[]")));
    }
  }
  if (root.contains("splits")) {
    const auto& obj = root["splits"];
    if (!obj.is_object()) throw std::invalid_argument("splits must be an object");
    reject_unknown_keys(obj, "splits", {"n_splits", "calib_fraction"});
    if (obj.contains("n_splits")) {
      config.splits.n_splits =
          static_cast<std::size_t>(as_u64(obj["n_splits"], "splits.n_splits"));
    }
    if (obj.contains("calib_fraction")) {
      config.splits.calib_fraction =
          as_double(obj["calib_fraction"], "splits.calib_fraction");
    }
  }
  if (root.contains("sweep")) {
    const auto& obj = root["sweep"];
    if (!obj.is_object()) throw std::invalid_argument("sweep must be an object");
    reject_unknown_keys(obj, "sweep", {"eps_grid"});
    if (!obj.contains("eps_grid")) {
      throw std::invalid_argument("sweep.eps_grid is required");
    }
    const auto& arr = obj["eps_grid"];
    if (!arr.is_array()) {
      throw std::invalid_argument("sweep.eps_grid must be an array");
    }
    config.eps_grid.emplace();
    for (const auto& entry : arr) {
      config.eps_grid->push_back(as_double(entry, "sweep.eps_grid[]"));
    }
  }
  if (root.contains("master_seed")) {
    config.master_seed = as_u64(root["master_seed"], "master_seed");
  }
  if (root.contains("output")) {
    config.output = as_string(root["output"], "output");
  }
  if (root.contains("force_nonempty")) {
    config.force_nonempty = as_bool(root["force_nonempty"], "force_nonempty");
  }
  validate(config);
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

LabeledPool load_pool(const RunConfig& config, bool softmax_rows) {
  validate(config);
  if (config.dataset) return read_dataset_csv(*config.dataset, softmax_rows);
  return generate_pool(*config.synth,
                       derive_seed(config.master_seed, kSynthPoolStream));
}

std::vector<MethodKind> effective_methods(const RunConfig& config) {
  if (!config.methods.empty()) return config.methods;
  return {MethodKind::ORACLE_CP, MethodKind::NOISY_CP, MethodKind::NRES_CP,
          MethodKind::NR_CP};
}

double effective_epsilon(const RunConfig& config) {
  return config.epsilon.value_or(0.0);
}

void require_epsilon_for_noise_methods(const RunConfig& config) {
  if (!config.epsilon && needs_epsilon(effective_methods(config))) {
    throw std::invalid_argument(
        "epsilon is required when a noise-corrected method is requested");
  }
}

SplitConfig split_config_from(const RunConfig& config) {
  SplitConfig split;
  split.n_splits = config.splits.n_splits;
  split.calib_fraction = config.splits.calib_fraction;
  split.alpha = config.alpha;
  split.epsilon = effective_epsilon(config);
  split.score = config.score;
  split.methods = effective_methods(config);
  split.master_seed = config.master_seed;
  split.force_nonempty = config.force_nonempty;
  return split;
}

std::string calibration_to_json(const CalibrationResult& result) {
  Json obj;
  obj["method"] = to_string(result.method);
  obj["q"] = q_to_json(result.q);
  obj["alpha"] = result.alpha;
  obj["n"] = result.n;
  obj["epsilon"] = result.epsilon;
  obj["k"] = result.k;
  obj["score_spec"] = score_to_json(result.score);
  obj["seed"] = result.seed;
  return obj.dump(2) + "\n";
}

CalibrationResult calibration_from_json(const std::string& json_text) {
  Json obj;
  try {
    obj = Json::parse(json_text);
  } catch (const Json::parse_error& err) {
    throw std::invalid_argument(
        std::string("calibration file is not valid JSON: ") + err.what());
  }
  if (!obj.is_object()) {
    throw std::invalid_argument("calibration root must be a JSON object");
  }
  reject_unknown_keys(obj, "calibration",
                      {"method", "q", "alpha", "n", "epsilon", "k", "score_spec",
                       "seed"});
  for (const char* key :
       {"method", "q", "alpha", "n", "epsilon", "k", "score_spec", "seed"}) {
    if (!obj.contains(key)) {
      throw std::invalid_argument(std::string("calibration is missing '") + key +
                                  "'");
    }
  }
  CalibrationResult result;
  result.method = method_from_string(as_string(obj["method"], "method"));
  if (obj["q"].is_string()) {
    const auto text = obj["q"].get<std::string>();
    if (text != "+inf") {
      throw std::invalid_argument("q must be a number or the string \"+inf\"");
    }
    result.q = kInfThreshold;
  } else {
    result.q = as_double(obj["q"], "q");
  }
  result.alpha = as_double(obj["alpha"], "alpha");
  validate_alpha(result.alpha);
  result.n = static_cast<std::size_t>(as_u64(obj["n"], "n"));
  result.epsilon = as_double(obj["epsilon"], "epsilon");
  if (!(result.epsilon >= 0.0 && result.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
  result.k = static_cast<int>(as_u64(obj["k"], "k"));
  if (result.k < 2) throw std::invalid_argument("k must be >= 2");
  result.score = parse_score(obj["score_spec"], "score_spec");
  result.seed = as_u64(obj["seed"], "seed");
  return result;
}

std::string experiment_report_json(const RunConfig& config,
                                   const std::vector<MethodStats>& stats) {
  Json obj;
  obj["config"] = resolved_config_json(config);
  Json results = Json::array();
  for (const auto& s : stats) results.push_back(method_stats_json(s));
  obj["results"] = results;
  return obj.dump(2) + "\n";
}

std::string sweep_report_json(const RunConfig& config,
                              const std::vector<SweepBlock>& blocks) {
  Json obj;
  obj["config"] = resolved_config_json(config);
  Json sweep = Json::array();
  for (const auto& block : blocks) {
    Json entry;
    entry["epsilon"] = block.epsilon;
    Json results = Json::array();
    for (const auto& s : block.stats) results.push_back(method_stats_json(s));
    entry["results"] = results;
    sweep.push_back(entry);
  }
  obj["sweep"] = sweep;
  return obj.dump(2) + "\n";
}

std::string experiment_report_csv(const std::vector<MethodStats>& stats) {
  std::string out = "method,metric,mean,std\n";
  for (const auto& s : stats) {
    const std::string name = to_string(s.method);
    out += name + ",coverage," + format_double(s.coverage.mean) + ',' +
           format_double(s.coverage.std) + '\n';
    out += name + ",avg_size," + format_double(s.avg_size.mean) + ',' +
           format_double(s.avg_size.std) + '\n';
    out += name + ",empty_rate," + format_double(s.empty_rate.mean) + ',' +
           format_double(s.empty_rate.std) + '\n';
    out += name + ",q," + format_double(s.q.mean) + ',' +
           format_double(s.q.std) + '\n';
  }
  return out;
}

std::string sweep_report_csv(const std::vector<SweepBlock>& blocks) {
  std::string out = "epsilon,method,metric,value\n";
  for (const auto& block : blocks) {
    const std::string eps = format_double(block.epsilon);
    for (const auto& s : block.stats) {
      const std::string name = to_string(s.method);
      out += eps + ',' + name + ",coverage," + format_double(s.coverage.mean) +
             '\n';
      out += eps + ',' + name + ",avg_size," + format_double(s.avg_size.mean) +
             '\n';
      out += eps + ',' + name + ",empty_rate," +
             format_double(s.empty_rate.mean) + '\n';
      out += eps + ',' + name + ",q," + format_double(s.q.mean) + '\n';
    }
  }
  return out;
}

std::string raw_split_csv(const SplitTable& table) {
  std::string out = "split,method,coverage,avg_size,empty_rate,q\n";
  if (table.by_method.empty()) return out;
  const std::size_t n_splits = table.by_method.front().size();
  for (std::size_t j = 0; j < n_splits; ++j) {
    for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
      const auto& row = table.by_method[mi][j];
      out += std::to_string(j) + ',' + to_string(table.methods[mi]) + ',' +
             format_double(row.coverage) + ',' + format_double(row.avg_size) +
             ',' + format_double(row.empty_rate) + ',' + format_double(row.q) +
             '\n';
    }
  }
  return out;
}

std::string predict_report_csv(const LabeledPool& pool,
                               const CalibrationResult& calib,
                               bool force_nonempty, std::uint64_t test_seed) {
  if (pool.k() != calib.k) {
    throw std::invalid_argument("dataset k does not match calibrated k");
  }
  Rng u_rng(derive_seed(test_seed, kPredictStream));
  std::string out = "sample_index,set_size,members\n";
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::optional<double> u;
    if (calib.score.randomized) u = u_rng.uniform01();
    const auto members = prediction_set(pool.probs.row(i), calib, u, force_nonempty);
    out += std::to_string(i) + ',' + std::to_string(members.size()) + ',' +
           join_labels(members) + '\n';
  }
  return out;
}

}  // namespace noisycp
