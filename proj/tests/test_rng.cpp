#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <doctest.h>

#include "noisycp/rng.hpp"

using namespace noisycp;

TEST_CASE("derive_seed is deterministic and stream-sensitive") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  // Streams at the top of the range stay distinct from small indices.
  CHECK(derive_seed(42, ~std::uint64_t{0}) != derive_seed(42, 0));
}

TEST_CASE("uniform01 stays in [0, 1) and reproduces by seed") {
  Rng a(7), b(7), c(8);
  bool same = true, different = false;
  for (int i = 0; i < 10000; ++i) {
    const double x = a.uniform01();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    same = same && (x == b.uniform01());
    different = different || (x != c.uniform01());
  }
  CHECK(same);
  CHECK(different);
}

TEST_CASE("uniform01 mean and variance are near uniform") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform01();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("uniform_below respects its bound and is roughly uniform") {
  Rng rng(99);
  std::vector<int> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto x = rng.uniform_below(5);
    REQUIRE(x < 5);
    ++counts[static_cast<std::size_t>(x)];
  }
  for (int count : counts) {
    CHECK(count > n / 5 - 1500);
    CHECK(count < n / 5 + 1500);
  }
}

TEST_CASE("normal draws have unit moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(sum_sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma draws match the target mean and variance") {
  for (double shape : {0.3, 0.7, 1.0, 2.5, 8.0}) {
    Rng rng(static_cast<std::uint64_t>(shape * 1000) + 5);
    const int n = 150000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      REQUIRE(x >= 0.0);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.03));
    CHECK(var == doctest::Approx(shape).epsilon(0.06));
  }
}

TEST_CASE("shuffled_indices is a uniform permutation") {
  Rng rng(31);
  const auto perm = shuffled_indices(100, rng);
  REQUIRE(perm.size() == 100);
  std::vector<bool> seen(100, false);
  for (std::size_t idx : perm) {
    REQUIRE(idx < 100);
    REQUIRE(!seen[idx]);
    seen[idx] = true;
  }

  // All 6 permutations of 3 items show up at roughly equal rates.
  std::map<std::vector<std::size_t>, int> counts;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    counts[shuffled_indices(3, rng)]++;
  }
  REQUIRE(counts.size() == 6);
  for (const auto& [_, count] : counts) {
    CHECK(count > trials / 6 - 700);
    CHECK(count < trials / 6 + 700);
  }
}

TEST_CASE("identical seeds give identical shuffles") {
  Rng a(5), b(5);
  CHECK(shuffled_indices(50, a) == shuffled_indices(50, b));
}
