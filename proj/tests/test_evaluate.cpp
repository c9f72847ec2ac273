#include <cmath>
#include <cstdlib>
#include <vector>

#include <doctest.h>

#include "noisycp/evaluate.hpp"
#include "noisycp/noise.hpp"
#include "noisycp/reference.hpp"
#include "noisycp/rng.hpp"
#include "noisycp/synthetic.hpp"

using namespace noisycp;

namespace {

LabeledPool clean_pool(std::size_t n, int k, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.k = k;
  cfg.n = n;
  return generate_pool(cfg, seed);
}

LabeledPool precorrupted_pool(std::size_t n, int k, double eps,
                              std::uint64_t seed) {
  auto pool = clean_pool(n, k, seed);
  const NoiseModel model{eps, k};
  pool.observed = corrupt_labels(*pool.clean, model, derive_seed(seed, 999));
  pool.noise = model;
  return pool;
}

bool outcome_equal(const SplitOutcome& a, const SplitOutcome& b) {
  const bool q_equal = (std::isinf(a.q) && std::isinf(b.q)) || a.q == b.q;
  return a.coverage == b.coverage && a.avg_size == b.avg_size &&
         a.empty_rate == b.empty_rate && q_equal;
}

bool tables_equal(const SplitTable& a, const SplitTable& b) {
  if (a.methods != b.methods) return false;
  if (a.by_method.size() != b.by_method.size()) return false;
  for (std::size_t mi = 0; mi < a.by_method.size(); ++mi) {
    if (a.by_method[mi].size() != b.by_method[mi].size()) return false;
    for (std::size_t j = 0; j < a.by_method[mi].size(); ++j) {
      if (!outcome_equal(a.by_method[mi][j], b.by_method[mi][j])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("set metrics count size, coverage and empties") {
  const std::vector<std::vector<Label>> sets{{0}, {1}};
  const std::vector<Label> labels{0, 2};
  const auto m = evaluate_sets(sets, labels);
  CHECK(m.avg_size == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.coverage == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.empty_rate == 0.0);

  const std::vector<std::vector<Label>> with_empty{{}, {0, 1}};
  const std::vector<Label> labels2{0, 1};
  const auto m2 = evaluate_sets(with_empty, labels2);
  CHECK(m2.avg_size == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m2.coverage == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m2.empty_rate == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<std::vector<Label>> full{{0, 1, 2}};
  const std::vector<Label> one{1};
  const auto m3 = evaluate_sets(full, one);
  CHECK(m3.avg_size == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m3.coverage == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<Label> mismatched{0};
  CHECK_THROWS_AS(evaluate_sets(sets, mismatched), std::invalid_argument);
  const std::vector<std::vector<Label>> none;
  const std::vector<Label> no_labels;
  CHECK_THROWS_AS(evaluate_sets(none, no_labels), std::invalid_argument);
}

TEST_CASE("calibration size is the floored fraction, clamped to a real split") {
  CHECK(calib_size(10, 0.5) == 5);
  CHECK(calib_size(10, 0.05) == 1);
  CHECK(calib_size(10, 0.99) == 9);
  CHECK(calib_size(3, 0.9) == 2);
  CHECK(calib_size(2, 0.9) == 1);
  CHECK(calib_size(2, 0.1) == 1);
  CHECK_THROWS_AS(calib_size(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(calib_size(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calib_size(10, 1.0), std::invalid_argument);
}

TEST_CASE("moments use the sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = moments(v);
  CHECK(m.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));

  const std::vector<double> single{7.5};
  const auto s = moments(single);
  CHECK(s.mean == 7.5);
  CHECK(s.std == 0.0);
}

TEST_CASE("at zero noise every method gives the same split outcome") {
  const auto pool = clean_pool(160, 5, 3);
  SplitConfig config;
  config.epsilon = 0.0;
  config.methods = {MethodKind::ORACLE_CP, MethodKind::NOISY_CP,
                    MethodKind::NRES_CP, MethodKind::NR_CP};
  config.score.kind = ScoreKind::APS;
  for (std::uint64_t j = 0; j < 5; ++j) {
    const auto outcomes = evaluate_split(pool, config, derive_seed(9, j));
    REQUIRE(outcomes.size() == 4);
    for (std::size_t mi = 1; mi < 4; ++mi) {
      CHECK(outcome_equal(outcomes[0], outcomes[mi]));
    }
  }
}

TEST_CASE("repeated splits are deterministic and match the serial baseline") {
  const auto pool = clean_pool(140, 4, 11);
  SplitConfig config;
  config.n_splits = 40;
  config.epsilon = 0.25;
  config.methods = {MethodKind::ORACLE_CP, MethodKind::NOISY_CP,
                    MethodKind::NRES_CP, MethodKind::NR_CP};
  config.score.kind = ScoreKind::APS;
  config.score.randomized = true;
  config.master_seed = 101;

  const auto a = run_repeated_splits(pool, config);
  const auto b = run_repeated_splits(pool, config);
  CHECK(tables_equal(a, b));

  const auto serial = reference::run_repeated_splits_serial(pool, config);
  CHECK(tables_equal(a, serial));
}

TEST_CASE("the thread cap does not change the table") {
  const auto pool = clean_pool(100, 4, 13);
  SplitConfig config;
  config.n_splits = 24;
  config.epsilon = 0.2;
  config.methods = {MethodKind::NOISY_CP, MethodKind::NRES_CP};
  config.score.kind = ScoreKind::APS;
  config.master_seed = 5;

  setenv("NOISY_CP_THREADS", "1", 1);
  const auto one = run_repeated_splits(pool, config);
  setenv("NOISY_CP_THREADS", "4", 1);
  const auto four = run_repeated_splits(pool, config);
  unsetenv("NOISY_CP_THREADS");
  CHECK(tables_equal(one, four));
}

TEST_CASE("aggregation reproduces hand-computed moments from the raw table") {
  const auto pool = clean_pool(120, 4, 17);
  SplitConfig config;
  config.n_splits = 30;
  config.epsilon = 0.2;
  config.methods = {MethodKind::NOISY_CP, MethodKind::NR_CP};
  config.score.kind = ScoreKind::APS;
  config.master_seed = 23;

  const auto table = run_repeated_splits(pool, config);
  const auto stats = aggregate(table);
  REQUIRE(stats.size() == 2);
  for (std::size_t mi = 0; mi < 2; ++mi) {
    CHECK(stats[mi].method == config.methods[mi]);
    const auto& rows = table.by_method[mi];
    double cov_sum = 0.0;
    double size_sum = 0.0;
    std::vector<double> finite;
    for (const auto& row : rows) {
      cov_sum += row.coverage;
      size_sum += row.avg_size;
      if (!std::isinf(row.q)) finite.push_back(row.q);
    }
    const double n = static_cast<double>(rows.size());
    CHECK(stats[mi].coverage.mean == doctest::Approx(cov_sum / n).epsilon(1e-12));
    CHECK(stats[mi].avg_size.mean == doctest::Approx(size_sum / n).epsilon(1e-12));
    double ss = 0.0;
    for (const auto& row : rows) {
      const double d = row.coverage - cov_sum / n;
      ss += d * d;
    }
    CHECK(stats[mi].coverage.std ==
          doctest::Approx(std::sqrt(ss / (n - 1.0))).epsilon(1e-12));
    CHECK(stats[mi].infinite_q_fraction ==
          doctest::Approx(1.0 - static_cast<double>(finite.size()) / n)
              .epsilon(1e-12));
  }
}

TEST_CASE("thresholds from a tiny calibration half aggregate as infinite") {
  // 4 samples at calib_fraction 0.5 leave 2 calibration points; alpha 0.1
  // needs index ceil(3 * 0.9) = 3 > 2, so every split's threshold is +inf.
  const auto pool = clean_pool(4, 3, 19);
  SplitConfig config;
  config.n_splits = 8;
  config.methods = {MethodKind::NOISY_CP};
  config.score.kind = ScoreKind::APS;
  const auto stats = aggregate(run_repeated_splits(pool, config));
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].infinite_q_fraction == 1.0);
  CHECK(std::isinf(stats[0].q.mean));
  CHECK(stats[0].q.std == 0.0);
  CHECK(stats[0].coverage.mean == 1.0);
  CHECK(stats[0].avg_size.mean == 3.0);
}

TEST_CASE("a pre-corrupted pool is used exactly as loaded") {
  const auto pool = precorrupted_pool(200, 5, 0.3, 29);
  REQUIRE(pool_is_precorrupted(pool));
  SplitConfig config;
  config.methods = {MethodKind::NOISY_CP};
  config.score.kind = ScoreKind::APS;

  // The uncorrected method never reads epsilon, and a pre-corrupted pool is
  // never re-corrupted, so the noise level cannot influence anything.
  config.epsilon = 0.1;
  const auto low = evaluate_split(pool, config, derive_seed(31, 0));
  config.epsilon = 0.3;
  const auto high = evaluate_split(pool, config, derive_seed(31, 0));
  CHECK(outcome_equal(low[0], high[0]));

  // A clean pool gets a fresh corruption per split, so there the level bites.
  const auto fresh = clean_pool(200, 5, 29);
  bool any_difference = false;
  for (std::uint64_t j = 0; j < 5 && !any_difference; ++j) {
    config.epsilon = 0.1;
    const auto a = evaluate_split(fresh, config, derive_seed(31, j));
    config.epsilon = 0.3;
    const auto b = evaluate_split(fresh, config, derive_seed(31, j));
    any_difference = !outcome_equal(a[0], b[0]);
  }
  CHECK(any_difference);
}

TEST_CASE("judging against noisy test labels restores nominal coverage") {
  // Noisy calibration plus noisy test labels are exchangeable, so the
  // uncorrected method hits the target there even under heavy noise.
  const auto pool = clean_pool(800, 6, 37);
  SplitConfig config;
  config.n_splits = 100;
  config.epsilon = 0.3;
  config.alpha = 0.1;
  config.methods = {MethodKind::NOISY_CP};
  config.score.kind = ScoreKind::APS;
  config.master_seed = 41;
  config.eval_on_noisy_test = true;
  const auto stats = aggregate(run_repeated_splits(pool, config));
  CHECK(stats[0].coverage.mean > 0.88);
  CHECK(stats[0].coverage.mean < 0.93);
}

TEST_CASE("sweeping the noise level inflates uncorrected sets, not corrected coverage") {
  const auto pool = clean_pool(1200, 6, 43);
  SplitConfig base;
  base.n_splits = 300;
  base.alpha = 0.1;
  base.methods = {MethodKind::NOISY_CP, MethodKind::NR_CP};
  base.score.kind = ScoreKind::APS;
  base.master_seed = 47;
  const std::vector<double> grid{0.0, 0.2, 0.4};

  const auto blocks = run_sweep(pool, base, grid);
  REQUIRE(blocks.size() == 3);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    CHECK(blocks[b].epsilon == grid[b]);
  }
  // Uncorrected sets grow with the noise level.
  CHECK(blocks[0].stats[0].avg_size.mean < blocks[1].stats[0].avg_size.mean);
  CHECK(blocks[1].stats[0].avg_size.mean < blocks[2].stats[0].avg_size.mean);
  // The corrected method stays near the target at every level.
  for (const auto& block : blocks) {
    CHECK(block.stats[1].coverage.mean > 0.85);
    CHECK(block.stats[1].coverage.mean < 0.95);
  }
}

TEST_CASE("split validation rejects broken configurations") {
  const auto pool = clean_pool(50, 4, 53);
  SplitConfig config;
  config.methods = {MethodKind::NOISY_CP};
  config.score.kind = ScoreKind::APS;
  CHECK_NOTHROW(validate(config, pool));

  SplitConfig no_methods = config;
  no_methods.methods.clear();
  CHECK_THROWS_AS(validate(no_methods, pool), std::invalid_argument);

  SplitConfig zero_splits = config;
  zero_splits.n_splits = 0;
  CHECK_THROWS_AS(validate(zero_splits, pool), std::invalid_argument);

  SplitConfig bad_alpha = config;
  bad_alpha.alpha = 0.0;
  CHECK_THROWS_AS(validate(bad_alpha, pool), std::invalid_argument);

  SplitConfig bad_eps = config;
  bad_eps.epsilon = 1.0;
  CHECK_THROWS_AS(validate(bad_eps, pool), std::invalid_argument);

  auto headless = precorrupted_pool(60, 4, 0.2, 59);
  headless.clean.reset();
  CHECK_THROWS_AS(validate(config, headless), std::invalid_argument);
}

TEST_CASE("the thread budget honors its environment variable") {
  unsetenv("NOISY_CP_THREADS");
  CHECK(planned_thread_count() >= 1);
  const int full = planned_thread_count();

  setenv("NOISY_CP_THREADS", "3", 1);
  CHECK(planned_thread_count() == 3);

  setenv("NOISY_CP_THREADS", "0", 1);
  CHECK(planned_thread_count() == full);

  setenv("NOISY_CP_THREADS", "abc", 1);
  CHECK_THROWS_AS(planned_thread_count(), std::invalid_argument);
  setenv("NOISY_CP_THREADS", "-2", 1);
  CHECK_THROWS_AS(planned_thread_count(), std::invalid_argument);
  setenv("NOISY_CP_THREADS", "2x", 1);
  CHECK_THROWS_AS(planned_thread_count(), std::invalid_argument);
  unsetenv("NOISY_CP_THREADS");
}
