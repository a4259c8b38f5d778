#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sparse_unif/error.hpp"
#include "sparse_unif/model.hpp"

using namespace sparse_unif;

TEST_CASE("epsilon_max and the extremal vector") {
  CHECK(epsilon_max(4, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(epsilon_max(100, 10) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(epsilon_max(37, 37) == doctest::Approx(2.0 * 36 / 37).epsilon(1e-15));
  CHECK_THROWS_AS(epsilon_max(10, 1), DomainError);

  const ProbabilityVector p = extremal_vector(4, 2);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.25);
  CHECK(l1_distance_to_uniform(p) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(l0_distance_to_uniform(p) == 2);
  for (std::uint64_t s : {2u, 5u, 17u, 100u}) {
    const ProbabilityVector q = extremal_vector(100, s);
    CHECK(l0_distance_to_uniform(q) == s);
    CHECK(l1_distance_to_uniform(q) == doctest::Approx(epsilon_max(100, s)).epsilon(1e-12));
  }
  // d eps_max / s -> 2 at fixed s/d.
  CHECK(1e6 * epsilon_max(1000000, 100000) / 100000 == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("thresholds") {
  CHECK(threshold_eps1({100, 16, 4, 0.5, 0.0}) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(threshold_eps1({1, 1, 1, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(threshold_eps2({1000, 100, 5, 0.65, 0.0}) == doctest::Approx(5.0 * std::sqrt(2.0 * std::log(100.0) / 1e5)).epsilon(1e-14));
  CHECK(threshold_eps2({1000, 100, 5, 0.65, 0.0}) == doctest::Approx(0.047985).epsilon(1e-5));
  CHECK_THROWS_AS(threshold_eps2({10, 1, 1, 0.0, 0.0}), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> nd(2, 5000);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t d = nd(rng);
    const std::uint64_t n = nd(rng);
    const std::uint64_t s = std::max<std::uint64_t>(1, d / 3);
    const ProblemParams p{n, d, s, 0.5, 0.0};
    const ProblemParams p4{4 * n, d, s, 0.5, 0.0};
    const ProblemParams p2{n, 2 * d, 2 * s, 0.5, 0.0};
    const ProblemParams ps{n, d * 2, s, 0.5, 0.0};
    CHECK(threshold_eps1(p4) == doctest::Approx(threshold_eps1(p) / 2.0).epsilon(1e-13));
    CHECK(threshold_eps2(p4) == doctest::Approx(threshold_eps2(p) / 2.0).epsilon(1e-13));
    const ProblemParams p1s{n, 2 * d, s, 0.5, 0.0};
    CHECK(threshold_eps2(p2) == doctest::Approx(2.0 * threshold_eps2(p1s)).epsilon(1e-13));
    CHECK(threshold_eps1(p2) == doctest::Approx(std::sqrt(2.0) * threshold_eps1(ps)).epsilon(1e-13));
  }
}

TEST_CASE("c_alpha") {
  CHECK(c_alpha(0.6) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(c_alpha(0.75) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::pow(1.0 - std::sqrt(0.25), 2) == doctest::Approx(0.25));
  CHECK(c_alpha(0.96) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK_THROWS_AS(c_alpha(0.5), DomainError);
  CHECK_THROWS_AS(c_alpha(1.0), DomainError);

  // A jump is what remains of a grid step after removing the first-order
  // Taylor term; the slope diverges at alpha = 1, so the grid stops at 0.99.
  auto slope = [](double a) { return a < 0.75 ? 1.0 : (1.0 - std::sqrt(1.0 - a)) / std::sqrt(1.0 - a); };
  const double h = 0.49 / 10000.0;
  double prev = c_alpha(0.5 + h);
  double max_jump = 0.0;
  bool increasing = true;
  for (int i = 2; i <= 10000; ++i) {
    const double a = 0.5 + h * i;
    const double v = c_alpha(a);
    max_jump = std::max(max_jump, std::abs(v - prev - slope(a - h) * h));
    increasing = increasing && v > prev;
    prev = v;
  }
  CHECK(max_jump < 1e-6);
  CHECK(std::abs(c_alpha(0.75 + 1e-9) - c_alpha(0.75 - 1e-9)) < 1e-8);
  CHECK(increasing);
}

TEST_CASE("regime classification") {
  const std::uint64_t d = 1000;
  const double ld = std::log(1000.0);
  CHECK(classify_regime(ProblemParams::from_alpha(d, d, 0.3, 0.0)).density == Density::Dense);
  CHECK(classify_regime(ProblemParams::from_alpha(d, d, 0.3, 0.0)).sample_size == SampleSizeRegime::AboveThreshold);
  CHECK(classify_regime(ProblemParams::from_alpha(d, d, 0.7, 0.0)).density == Density::Sparse);
  CHECK(classify_regime(ProblemParams::from_alpha(d, d, 0.7, 0.0)).sample_size == SampleSizeRegime::BelowThreshold);
  const auto n_mid = static_cast<std::uint64_t>(2.0 * d * ld * ld);
  CHECK(classify_regime(ProblemParams::from_alpha(n_mid, d, 0.7, 0.0)).sample_size ==
        SampleSizeRegime::Indeterminate);
  const auto n_big = static_cast<std::uint64_t>(d * ld * ld * ld) + 1;
  CHECK(classify_regime(ProblemParams::from_alpha(n_big, d, 0.7, 0.0)).sample_size ==
        SampleSizeRegime::AboveThreshold);
  RegimeConstants c;
  c.dense = 100.0;
  CHECK(classify_regime(ProblemParams::from_alpha(d, d, 0.3, 0.0), c).sample_size ==
        SampleSizeRegime::BelowThreshold);
}

TEST_CASE("block alternative") {
  const ProbabilityVector p = make_block_alternative({10, 4, 2, 0.5, 0.2});
  CHECK(p[0] == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(p[2] == 0.25);
  CHECK(p[3] == 0.25);
  CHECK(l1_distance_to_uniform(p) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(l0_distance_to_uniform(p, 1e-12) == 2);
  const ProbabilityVector u = make_block_alternative({10, 4, 2, 0.5, 0.0});
  CHECK(l1_distance_to_uniform(u) == 0.0);
  CHECK(l0_distance_to_uniform(u) == 0);
  CHECK_THROWS_AS(make_block_alternative({10, 4, 3, 0.5, 0.1}), DomainError);
  CHECK_THROWS_AS(make_block_alternative({10, 4, 2, 0.5, 0.6}), InfeasibleError);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t d = std::uniform_int_distribution<std::uint64_t>(2, 3000)(rng);
    std::uint64_t s = 2 * std::uniform_int_distribution<std::uint64_t>(1, d / 2)(rng);
    const double eps = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * s / d;
    const ProbabilityVector q = make_block_alternative({100, d, s, 0.5, eps});
    CHECK(std::abs(l1_distance_to_uniform(q) - eps) < 1e-12);
  }
}

TEST_CASE("probability vector validation") {
  CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(ProbabilityVector({1.5, -0.5}), DomainError);
  CHECK_NOTHROW(ProbabilityVector({0.5, 0.5 + 1e-13}));
  CHECK(l2_distance_sq_to_uniform(ProbabilityVector({0.35, 0.15, 0.25, 0.25})) == doctest::Approx(0.02));
  CHECK(ProblemParams::from_alpha(10, 100, 0.5, 0.0).s == 10);
  CHECK(ProblemParams::from_alpha(10, 100, 1.0, 0.0).s == 1);
  CHECK_THROWS_AS((ProblemParams{10, 5, 6, 0.5, 0.0}.validate()), DomainError);
}
