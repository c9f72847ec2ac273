#include "noisycp/evaluate.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>

#include "noisycp/noise.hpp"
#include "noisycp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noisycp {
namespace {

// Per-split seed sub-streams.
constexpr std::uint64_t kShuffleStream = 0;
constexpr std::uint64_t kCalibCorruptStream = 1;
constexpr std::uint64_t kCalibUStream = 2;
constexpr std::uint64_t kTestUStream = 3;
constexpr std::uint64_t kTestCorruptStream = 4;

}  // namespace

std::size_t calib_size(std::size_t n, double calib_fraction) {
  if (!(calib_fraction > 0.0 && calib_fraction < 1.0)) {
    throw std::invalid_argument("calib_fraction must lie in (0, 1)");
  }
  if (n < 2) throw std::invalid_argument("need at least 2 samples to split");
  const auto raw = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * calib_fraction));
  return std::min(std::max<std::size_t>(raw, 1), n - 1);
}

void validate(const SplitConfig& config, const LabeledPool& pool) {
  validate(pool);
  validate(config.score);
  validate_alpha(config.alpha);
  validate(NoiseModel{config.epsilon, pool.k()});
  if (config.n_splits == 0) throw std::invalid_argument("n_splits must be >= 1");
  if (config.methods.empty()) {
    throw std::invalid_argument("at least one method is required");
  }
  calib_size(pool.size(), config.calib_fraction);
  if (pool_is_precorrupted(pool) && !pool.clean && !config.eval_on_noisy_test) {
    throw std::invalid_argument(
        "pre-corrupted pool without clean labels cannot be scored against the "
        "truth");
  }
}

SetMetrics evaluate_sets(std::span<const std::vector<Label>> sets,
                         std::span<const Label> labels) {
  if (sets.size() != labels.size()) {
    throw std::invalid_argument("one label per prediction set is required");
  }
  if (sets.empty()) throw std::invalid_argument("no prediction sets to evaluate");
  SetMetrics metrics;
  std::size_t covered = 0;
  std::size_t empties = 0;
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    total_size += sets[i].size();
    if (sets[i].empty()) ++empties;
    for (Label member : sets[i]) {
      if (member == labels[i]) {
        ++covered;
        break;
      }
    }
  }
  const auto n = static_cast<double>(sets.size());
  metrics.avg_size = static_cast<double>(total_size) / n;
  metrics.coverage = static_cast<double>(covered) / n;
  metrics.empty_rate = static_cast<double>(empties) / n;
  return metrics;
}

std::vector<SplitOutcome> evaluate_split(const LabeledPool& pool,
                                         const SplitConfig& config,
                                         std::uint64_t split_seed) {
  const std::size_t n = pool.size();
  const int k = pool.k();
  const std::size_t nc = calib_size(n, config.calib_fraction);
  const std::size_t nt = n - nc;
  const NoiseModel noise{config.epsilon, k};
  const bool precorrupted = pool_is_precorrupted(pool);

  Rng shuffle_rng(derive_seed(split_seed, kShuffleStream));
  const auto perm = shuffled_indices(n, shuffle_rng);

  // Labels seen by calibration and labels the test part is judged against.
  // A pool that arrived clean gets a fresh corruption of its calibration
  // half on every split; a pre-corrupted pool is used exactly as loaded.
  LabeledPool calib_pool{ProbMatrix(k), {}, {}, {}, {}};
  calib_pool.observed.reserve(nc);

  std::vector<Label> calib_clean(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t src = perm[i];
    calib_pool.probs.append_unchecked(pool.probs.row(src));
    calib_clean[i] = pool.clean ? (*pool.clean)[src] : pool.observed[src];
  }
  if (precorrupted) {
    for (std::size_t i = 0; i < nc; ++i) {
      calib_pool.observed.push_back(pool.observed[perm[i]]);
    }
  } else {
    calib_pool.observed = corrupt_labels(
        calib_clean, noise, derive_seed(split_seed, kCalibCorruptStream));
  }
  calib_pool.clean = calib_clean;

  std::vector<Label> test_truth(nt);
  if (config.eval_on_noisy_test) {
    if (precorrupted) {
      for (std::size_t i = 0; i < nt; ++i) {
        test_truth[i] = pool.observed[perm[nc + i]];
      }
    } else {
      std::vector<Label> test_clean(nt);
      for (std::size_t i = 0; i < nt; ++i) {
        test_clean[i] = pool.observed[perm[nc + i]];
      }
      test_truth = corrupt_labels(test_clean, noise,
                                  derive_seed(split_seed, kTestCorruptStream));
    }
  } else {
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t src = perm[nc + i];
      test_truth[i] = pool.clean ? (*pool.clean)[src] : pool.observed[src];
    }
  }

  // Every method sees the same uniform draws: the calibration and test
  // streams restart from the same sub-seed for each method.
  std::vector<SplitOutcome> outcomes(config.methods.size());
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const MethodKind method = config.methods[mi];
    const auto calib = calibrate(calib_pool, method, config.alpha, noise,
                                 config.score, derive_seed(split_seed, kCalibUStream));

    Rng test_u_rng(derive_seed(split_seed, kTestUStream));
    std::size_t covered = 0;
    std::size_t empties = 0;
    std::size_t total_size = 0;
    for (std::size_t i = 0; i < nt; ++i) {
      std::optional<double> u;
      if (config.score.randomized) u = test_u_rng.uniform01();
      const auto row = pool.probs.row(perm[nc + i]);
      int size = set_size(row, calib, u);
      bool covers = set_covers(row, test_truth[i], calib, u);
      if (size == 0) {
        if (config.force_nonempty) {
          const auto forced = prediction_set(row, calib, u, true);
          size = static_cast<int>(forced.size());
          covers = !forced.empty() && forced.front() == test_truth[i];
        } else {
          ++empties;
        }
      }
      covered += covers ? 1 : 0;
      total_size += static_cast<std::size_t>(size);
    }
    auto& out = outcomes[mi];
    out.coverage = static_cast<double>(covered) / static_cast<double>(nt);
    out.avg_size = static_cast<double>(total_size) / static_cast<double>(nt);
    out.empty_rate = static_cast<double>(empties) / static_cast<double>(nt);
    out.q = calib.q;
  }
  return outcomes;
}

int planned_thread_count() {
#ifdef _OPENMP
  int threads = omp_get_max_threads();
  if (const char* env = std::getenv("NOISY_CP_THREADS")) {
    const std::string text(env);
    if (!text.empty()) {
      std::size_t used = 0;
      long value = -1;
      try {
        value = std::stol(text, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("NOISY_CP_THREADS must be an integer");
      }
      if (used != text.size() || value < 0) {
        throw std::invalid_argument(
            "NOISY_CP_THREADS must be a non-negative integer");
      }
      if (value > 0) threads = static_cast<int>(value);
    }
  }
  return std::max(threads, 1);
#else
  return 1;
#endif
}

SplitTable run_repeated_splits(const LabeledPool& pool,
                               const SplitConfig& config) {
  validate(config, pool);

  SplitTable table;
  table.methods = config.methods;
  table.by_method.assign(config.methods.size(), {});
  for (auto& slot : table.by_method) slot.resize(config.n_splits);

  const auto n_splits = static_cast<std::ptrdiff_t>(config.n_splits);
  std::exception_ptr failure;

#ifdef _OPENMP
  const int threads = planned_thread_count();
#pragma omp parallel for num_threads(threads) schedule(dynamic)
#endif
  for (std::ptrdiff_t j = 0; j < n_splits; ++j) {
    try {
      const auto outcomes = evaluate_split(
          pool, config,
          derive_seed(config.master_seed, static_cast<std::uint64_t>(j)));
      for (std::size_t mi = 0; mi < outcomes.size(); ++mi) {
        table.by_method[mi][static_cast<std::size_t>(j)] = outcomes[mi];
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(noisycp_split_failure)
#endif
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

Moments moments(std::span<const double> values) {
  Moments out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1 && std::isfinite(out.mean)) {
    double ss = 0.0;
    for (double v : values) {
      const double d = v - out.mean;
      ss += d * d;
    }
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::vector<MethodStats> aggregate(const SplitTable& table) {
  std::vector<MethodStats> stats(table.methods.size());
  for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
    const auto& rows = table.by_method[mi];
    std::vector<double> coverage(rows.size());
    std::vector<double> sizes(rows.size());
    std::vector<double> empties(rows.size());
    std::vector<double> finite_q;
    finite_q.reserve(rows.size());
    std::size_t infinite = 0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      coverage[j] = rows[j].coverage;
      sizes[j] = rows[j].avg_size;
      empties[j] = rows[j].empty_rate;
      if (std::isinf(rows[j].q)) {
        ++infinite;
      } else {
        finite_q.push_back(rows[j].q);
      }
    }
    auto& s = stats[mi];
    s.method = table.methods[mi];
    s.coverage = moments(coverage);
    s.avg_size = moments(sizes);
    s.empty_rate = moments(empties);
    // Threshold moments cover the finite splits; the infinite share is
    // reported separately.
    if (finite_q.empty() && !rows.empty()) {
      s.q = Moments{kInfThreshold, 0.0};
    } else {
      s.q = moments(finite_q);
    }
    s.infinite_q_fraction = rows.empty()
                                ? 0.0
                                : static_cast<double>(infinite) /
                                      static_cast<double>(rows.size());
  }
  return stats;
}

std::vector<SweepBlock> run_sweep(const LabeledPool& pool,
                                  const SplitConfig& base,
                                  std::span<const double> eps_grid) {
  if (eps_grid.empty()) {
    throw std::invalid_argument("sweep needs a non-empty epsilon grid");
  }
  std::vector<SweepBlock> blocks;
  blocks.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    SplitConfig config = base;
    config.epsilon = eps;
    blocks.push_back({eps, aggregate(run_repeated_splits(pool, config))});
  }
  return blocks;
}

}  // namespace noisycp
