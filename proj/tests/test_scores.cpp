#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "noisycp/reference.hpp"
#include "noisycp/rng.hpp"
#include "noisycp/scores.hpp"

using namespace noisycp;

namespace {

// Continuous probability row: ties have probability zero.
std::vector<double> random_row(int k, Rng& rng) {
  std::vector<double> row(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (auto& p : row) {
    p = -std::log(1.0 - rng.uniform01());
    sum += p;
  }
  for (auto& p : row) p /= sum;
  return row;
}

}  // namespace

TEST_CASE("hps is one minus the class probability") {
  const std::vector<double> p{0.7, 0.2, 0.1};
  CHECK(hps_score(p, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(hps_score(p, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(hps_score(p, 2) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(hps_score(p, 3), std::out_of_range);
  CHECK_THROWS_AS(hps_score(p, -1), std::out_of_range);
}

TEST_CASE("aps accumulates the mass of classes at least as probable") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  CHECK(aps_score(p, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(aps_score(p, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(aps_score(p, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(aps_rank(p, 0) == 1);
  CHECK(aps_rank(p, 1) == 2);
  CHECK(aps_rank(p, 2) == 3);
}

TEST_CASE("aps includes every tied class") {
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  for (Label y = 0; y < 4; ++y) {
    CHECK(aps_score(p, y) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(aps_rank(p, y) == 4);
  }
}

TEST_CASE("raps adds the rank penalty") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  ScoreSpec spec;
  spec.kind = ScoreKind::RAPS;
  spec.raps_a = 0.1;
  spec.raps_b = 1.0;
  CHECK(raps_score(p, 1, spec) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(raps_score(p, 0, spec) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("raps with zero weight reduces to aps") {
  Rng rng(11);
  ScoreSpec spec;
  spec.kind = ScoreKind::RAPS;
  spec.raps_a = 0.0;
  spec.raps_b = 3.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(8));
    const auto p = random_row(k, rng);
    for (Label y = 0; y < k; ++y) {
      CHECK(raps_score(p, y, spec) == aps_score(p, y));
    }
  }
}

TEST_CASE("negative raps parameters are rejected") {
  ScoreSpec spec;
  spec.kind = ScoreKind::RAPS;
  spec.raps_a = -0.1;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.raps_a = 0.1;
  spec.raps_b = -1.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_CASE("randomized aps interpolates between strict mass and full mass") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  ScoreSpec spec;
  spec.kind = ScoreKind::APS;
  spec.randomized = true;
  CHECK(rand_score(p, 1, 0.0, spec) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rand_score(p, 1, 1.0, spec) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rand_score(p, 1, 0.5, spec) == doctest::Approx(0.65).epsilon(1e-15));
  CHECK_THROWS_AS(rand_score(p, 1, -0.1, spec), std::invalid_argument);
  CHECK_THROWS_AS(rand_score(p, 1, 1.1, spec), std::invalid_argument);
}

TEST_CASE("randomized aps at u=1 equals deterministic aps without ties") {
  Rng rng(13);
  ScoreSpec spec;
  spec.kind = ScoreKind::APS;
  spec.randomized = true;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(8));
    const auto p = random_row(k, rng);
    const auto y = static_cast<Label>(rng.uniform_below(static_cast<std::uint64_t>(k)));
    CHECK(rand_score(p, y, 1.0, spec) ==
          doctest::Approx(aps_score(p, y)).epsilon(1e-12));
  }
}

TEST_CASE("randomized hps passes through unchanged") {
  const std::vector<double> p{0.7, 0.2, 0.1};
  ScoreSpec spec;
  spec.kind = ScoreKind::HPS;
  spec.randomized = true;
  CHECK(rand_score(p, 0, 0.3, spec) == hps_score(p, 0));
  CHECK(rand_score(p, 2, 0.9, spec) == hps_score(p, 2));
}

TEST_CASE("randomized raps keeps the deterministic penalty") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  ScoreSpec spec;
  spec.kind = ScoreKind::RAPS;
  spec.raps_a = 0.1;
  spec.raps_b = 1.0;
  spec.randomized = true;
  // strict mass 0.5 + 0.5*0.3 + penalty 0.1*(2-1)
  CHECK(rand_score(p, 1, 0.5, spec) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("class_score enforces the u contract") {
  const std::vector<double> p{0.6, 0.4};
  ScoreSpec det;
  det.kind = ScoreKind::APS;
  CHECK_THROWS_AS(class_score(p, 0, det, 0.5), std::invalid_argument);
  ScoreSpec rand_spec;
  rand_spec.kind = ScoreKind::APS;
  rand_spec.randomized = true;
  CHECK_THROWS_AS(class_score(p, 0, rand_spec), std::invalid_argument);
  CHECK(class_score(p, 0, det) == aps_score(p, 0));
  CHECK(class_score(p, 0, rand_spec, 0.25) == rand_score(p, 0, 0.25, rand_spec));
}

TEST_CASE("score_all_classes matches the single-class path bitwise") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(9));
    const auto p = random_row(k, rng);
    for (ScoreKind kind : {ScoreKind::HPS, ScoreKind::APS, ScoreKind::RAPS}) {
      for (bool randomized : {false, true}) {
        ScoreSpec spec;
        spec.kind = kind;
        spec.randomized = randomized;
        std::optional<double> u;
        if (randomized) u = rng.uniform01();
        std::vector<double> all(static_cast<std::size_t>(k));
        score_all_classes(p, spec, u, all);
        for (Label y = 0; y < k; ++y) {
          CHECK(all[static_cast<std::size_t>(y)] == class_score(p, y, spec, u));
        }
      }
    }
  }
}

TEST_CASE("hps class average is exactly (k-1)/k") {
  Rng rng(19);
  ScoreSpec spec;
  spec.kind = ScoreKind::HPS;
  for (int trial = 0; trial < 400; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(9));
    const auto p = random_row(k, rng);
    const double expected = static_cast<double>(k - 1) / static_cast<double>(k);
    CHECK(mean_class_score(p, spec) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("aps class average respects the confidence bound") {
  const std::vector<double> example{0.5, 0.3, 0.2};
  ScoreSpec spec;
  spec.kind = ScoreKind::APS;
  CHECK(mean_class_score(example, spec) ==
        doctest::Approx(0.766666666666).epsilon(1e-9));

  Rng rng(23);
  for (int trial = 0; trial < 400; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(9));
    const auto p = random_row(k, rng);
    const double top = *std::max_element(p.begin(), p.end());
    const double mean = mean_class_score(p, spec);
    CHECK(mean >= (top + 1.0) / 2.0 - 1e-12);
    CHECK(mean <= (top + static_cast<double>(k) - 1.0) / static_cast<double>(k) +
                      1e-12);
  }
}

TEST_CASE("more probable classes never score worse") {
  Rng rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(9));
    const auto p = random_row(k, rng);
    for (Label a = 0; a < k; ++a) {
      for (Label b = 0; b < k; ++b) {
        if (p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]) {
          CHECK(aps_score(p, a) < aps_score(p, b));
          CHECK(hps_score(p, a) < hps_score(p, b));
        }
      }
    }
  }
}

TEST_CASE("aps agrees with the sorted-accumulation oracle") {
  Rng rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(4));
    const auto p = random_row(k, rng);
    for (Label y = 0; y < k; ++y) {
      CHECK(aps_score(p, y) ==
            doctest::Approx(reference::aps_score_sorted(p, y)).epsilon(1e-12));
      const double u = rng.uniform01();
      ScoreSpec spec;
      spec.kind = ScoreKind::APS;
      spec.randomized = true;
      CHECK(rand_score(p, y, u, spec) ==
            doctest::Approx(reference::rand_aps_score_sorted(p, y, u))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("score ranges stay in bounds") {
  Rng rng(41);
  ScoreSpec aps;
  aps.kind = ScoreKind::APS;
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(9));
    const auto p = random_row(k, rng);
    const auto argmax = static_cast<Label>(
        std::max_element(p.begin(), p.end()) - p.begin());
    const auto argmin = static_cast<Label>(
        std::min_element(p.begin(), p.end()) - p.begin());
    for (Label y = 0; y < k; ++y) {
      const double h = hps_score(p, y);
      const double a = aps_score(p, y);
      CHECK(h >= 0.0);
      CHECK(h <= 1.0);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0 + 1e-12);
    }
    CHECK(aps_score(p, argmax) >= p[static_cast<std::size_t>(argmax)] - 1e-15);
    CHECK(aps_score(p, argmin) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
