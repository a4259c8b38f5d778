#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/hypergeometric.hpp>
#include <cmath>
#include <map>
#include <random>

#include "sparse_unif/error.hpp"
#include "sparse_unif/lowerbound.hpp"
#include "sparse_unif/numerics.hpp"
#include "sparse_unif/sampling.hpp"

using namespace sparse_unif;

namespace {

// E[cosh(c)^K] by plain double summation against Boost's hypergeometric pmf.
double second_moment_oracle(const ProblemParams& p) {
  const unsigned half_d = static_cast<unsigned>(p.d / 2), half_s = static_cast<unsigned>(p.s / 2);
  const boost::math::hypergeometric_distribution<> k(half_s, half_s, half_d);
  const double c = 2.0 * p.n * p.d * p.epsilon * p.epsilon / (double(p.s) * p.s);
  double v = 0.0;
  const unsigned lo = 2 * half_s > half_d ? 2 * half_s - half_d : 0;
  for (unsigned j = lo; j <= half_s; ++j) v += boost::math::pdf(k, j) * std::pow(std::cosh(c), j);
  return v;
}

// Likelihood ratio from the elementary symmetric polynomial e_K(a) / C(m, K).
double esp_likelihood(const ProblemParams& p, std::span<const std::uint64_t> z) {
  const double theta = p.d * p.epsilon / p.s;
  const std::size_t m = p.d / 2, k = p.s / 2;
  std::vector<double> e(k + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double za = static_cast<double>(z[2 * i]), zb = static_cast<double>(z[2 * i + 1]);
    const double a = 0.5 * (std::pow(1 + theta, za) * std::pow(1 - theta, zb) + std::pow(1 - theta, za) * std::pow(1 + theta, zb));
    for (std::size_t j = std::min(k, i + 1); j > 0; --j) e[j] += a * e[j - 1];
  }
  return e[k] / std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0));
}

// Literal average over every (pair subset, sign vector) atom of prod (d p_j)^{Z_j}.
double brute_likelihood(const ProblemParams& p, std::span<const std::uint64_t> z) {
  const std::size_t m = p.d / 2, k = p.s / 2;
  const double shift = p.epsilon / p.s, u = 1.0 / p.d;
  double sum = 0.0;
  double atoms = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    for (std::uint32_t signs = 0; signs < (1u << k); ++signs) {
      std::vector<double> q(p.d, u);
      std::size_t r = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(mask >> i & 1u)) continue;
        const double eta = (signs >> r++ & 1u) ? 1.0 : -1.0;
        q[2 * i] = u + eta * shift;
        q[2 * i + 1] = u - eta * shift;
      }
      double l = 1.0;
      for (std::size_t j = 0; j < p.d; ++j) l *= std::pow(p.d * q[j], static_cast<double>(z[j]));
      sum += l;
      atoms += 1.0;
    }
  }
  return sum / atoms;
}

}  // namespace

TEST_CASE("risk lower bound") {
  CHECK(risk_lower_bound_from_second_moment(1.0) == 1.0);
  CHECK(risk_lower_bound_from_second_moment(1.0004) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(risk_lower_bound_from_second_moment(5.0) == 0.0);
  CHECK(risk_lower_bound_from_second_moment(INFINITY) == 0.0);
  CHECK_THROWS_AS(risk_lower_bound_from_second_moment(0.999), DomainError);
  double prev = 1.0;
  for (double m = 1.0; m < 6.0; m += 0.01) {
    const double v = risk_lower_bound_from_second_moment(m);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("paired prior draws") {
  std::map<std::vector<double>, int> seen;
  const ProblemParams p{10, 4, 2, 0.5, 0.2};
  const int draws = 40000;
  for (int r = 0; r < draws; ++r) {
    const ProbabilityVector v = sample_paired_dense_prior(p, SeedSpec{1, 0}.child(r));
    CHECK(l1_distance_to_uniform(v) == doctest::Approx(0.2).epsilon(1e-12));
    ++seen[std::vector<double>(v.values().begin(), v.values().end())];
  }
  // Two pair choices times two signs.
  CHECK(seen.size() == 4);
  for (const auto& [vec, count] : seen) CHECK(std::abs(count / double(draws) - 0.25) < 0.01);
  const std::vector<double> example = {0.35, 0.15, 0.25, 0.25};
  bool found = false;
  for (const auto& [vec, count] : seen) {
    bool eq = true;
    for (std::size_t j = 0; j < 4; ++j) eq = eq && std::abs(vec[j] - example[j]) < 1e-12;
    found = found || eq;
  }
  CHECK(found);

  const ProbabilityVector u = sample_paired_dense_prior({10, 8, 4, 0.5, 0.0}, {2, 0});
  CHECK(l1_distance_to_uniform(u) == 0.0);
  CHECK_THROWS_AS(sample_paired_dense_prior({10, 4, 2, 0.5, 0.6}, {2, 0}), InfeasibleError);
  CHECK_THROWS_AS(sample_paired_dense_prior({10, 5, 2, 0.5, 0.1}, {2, 0}), DomainError);

  for (std::uint64_t r = 0; r < 100000; ++r) {
    const ProbabilityVector v = sample_paired_dense_prior({10, 64, 16, 0.5, 0.25}, SeedSpec{3, 0}.child(r));
    if (l0_distance_to_uniform(v) != 16) FAIL("support size");
  }
}

TEST_CASE("paired second moment, exact") {
  const SecondMomentReport r = paired_second_moment_exact({2, 4, 2, 0.5, 0.1});
  CHECK(r.is_exact);
  CHECK(r.value == doctest::Approx(0.5 + 0.5 * std::cosh(0.04)).epsilon(1e-14));
  CHECK(r.value == doctest::Approx(1.000400).epsilon(1e-6));
  CHECK(r.risk_lower_bound == doctest::Approx(0.98999).epsilon(1e-5));
  CHECK(paired_second_moment_exact({2, 4, 2, 0.5, 0.0}).value == 1.0);
  CHECK(paired_second_moment_exact({2, 4, 2, 0.5, 0.0}).risk_lower_bound == 1.0);
  CHECK(paired_second_moment_exact({1000000, 100, 10, 0.5, 0.5}).value == INFINITY);
  CHECK(paired_second_moment_exact({1000000, 100, 10, 0.5, 0.5}).risk_lower_bound == 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t d = 2 * std::uniform_int_distribution<std::uint64_t>(1, 500)(rng);
    const std::uint64_t s = 2 * std::uniform_int_distribution<std::uint64_t>(1, d / 2)(rng);
    const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(1, 5000)(rng);
    const double eps = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * s / d;
    const ProblemParams p{n, d, s, 0.5, eps};
    const SecondMomentReport e = paired_second_moment_exact(p);
    CHECK(e.value <= *e.binomial_bound * (1 + 1e-12));
    const double oracle = second_moment_oracle(p);
    if (std::isfinite(oracle) && oracle < 1e100) CHECK(e.value == doctest::Approx(oracle).epsilon(1e-9));
    ProblemParams more_eps = p, more_n = p;
    more_eps.epsilon = eps * 1.1;
    more_n.n = n + 10;
    if (e.value < 1e300) {
      CHECK(paired_second_moment_exact(more_eps).value >= e.value);
      CHECK(paired_second_moment_exact(more_n).value >= e.value);
    }
  }
}

TEST_CASE("paired likelihood ratio routes agree") {
  for (const ProblemParams& p : {ProblemParams{4, 8, 4, 0.5, 0.05}, ProblemParams{8, 16, 4, 0.5, 0.05},
                                 ProblemParams{30, 12, 6, 0.5, 0.3}}) {
    for (std::uint64_t r = 0; r < 25; ++r) {
      const Histogram z = sample_null(p.d, p.n, SamplingScheme::Poissonized, SeedSpec{6, r});
      const double l = paired_likelihood_ratio(p, z.counts());
      CHECK(l == doctest::Approx(esp_likelihood(p, z.counts())).epsilon(1e-12));
      CHECK(l == doctest::Approx(brute_likelihood(p, z.counts())).epsilon(1e-12));
    }
  }
  CHECK(paired_prior_atoms({4, 8, 4, 0.5, 0.05}) == 24);
}

TEST_CASE("paired second moment, Monte Carlo") {
  const SecondMomentReport zero = paired_second_moment_mc({2, 4, 2, 0.5, 0.0}, 100, {1, 0});
  CHECK(zero.value == 1.0);
  CHECK_FALSE(zero.is_exact);
  for (const ProblemParams& p : {ProblemParams{2, 4, 2, 0.5, 0.1}, ProblemParams{4, 8, 4, 0.5, 0.05},
                                 ProblemParams{8, 16, 4, 0.5, 0.05}}) {
    const SecondMomentReport mc = paired_second_moment_mc(p, 100000, {5, 0});
    const SecondMomentReport ex = paired_second_moment_exact(p);
    CHECK(std::abs(mc.value - ex.value) <= 3.0 * *mc.se);
  }
  PairedMcOptions tight;
  tight.max_atoms = 4;
  CHECK_THROWS_AS(paired_second_moment_mc({8, 16, 4, 0.5, 0.05}, 10, {1, 0}, tight), ConfigError);
  tight.inner_samples = 64;
  CHECK_NOTHROW(paired_second_moment_mc({8, 16, 4, 0.5, 0.05}, 10, {1, 0}, tight));
  // Thread count never changes the estimate.
  PairedMcOptions many;
  many.threads = 5;
  CHECK(paired_second_moment_mc({8, 16, 4, 0.5, 0.05}, 5000, {7, 0}).value ==
        paired_second_moment_mc({8, 16, 4, 0.5, 0.05}, 5000, {7, 0}, many).value);
}

TEST_CASE("sparse two-sided prior") {
  const std::uint64_t d = 10000;
  const double ld = std::log(double(d));
  const auto n = static_cast<std::uint64_t>(d * ld * ld * ld);
  ProblemParams p = ProblemParams::from_alpha(n, d, 0.7, 0.0);
  if (p.s % 2) ++p.s;
  const double eta = sparse_twosided_eta(p, 0.1);
  CHECK(eta == doctest::Approx(std::sqrt(2 * 0.2 * 0.9 * ld / (double(n) * d))).epsilon(1e-13));
  const ProbabilityVector v = sample_sparse_twosided_prior(p, 0.1, {1, 0});
  CHECK(l1_distance_to_uniform(v) == doctest::Approx(p.s * eta).epsilon(1e-9));
  CHECK(l0_distance_to_uniform(v) == p.s);
  for (std::size_t j = 0; j < d / 2; ++j) CHECK(v[j] >= 1.0 / d);
  CHECK(sparse_twosided_eta(p, 1.0 - 1e-14) < 1e-6 * eta);

  const ProblemParams small{300, 101, 10, 0.6, 0.0};
  for (std::uint64_t r = 0; r < 100000; ++r) sample_sparse_twosided_prior(small, 0.1, SeedSpec{2, 0}.child(r));
  CHECK_THROWS_AS(sample_sparse_twosided_prior({1, 100, 10, 0.6, 0.0}, 0.1, {1, 0}), InfeasibleError);
  CHECK_THROWS_AS(sample_sparse_twosided_prior({1000, 100, 10, 0.4, 0.0}, 0.1, {1, 0}), DomainError);
}

TEST_CASE("impossibility prior") {
  // On G the second-half shift reaches gamma_d / (delta^{3/2} sqrt(s) d), so the
  // construction fits in the simplex only once sqrt(s) >~ gamma_d / delta^{3/2};
  // delta = 0.4 brings that within desk scale.
  const ProblemParams p{400, 200, 40, 0.3, 0.0};
  const double delta = 0.4;
  const double gamma = default_gamma_d(p);
  const double r_n = default_r_n(p);
  CHECK(gamma >= 1.0);
  CHECK(r_n == doctest::Approx(0.5 * std::min(1.0 / 200, 1.0 / std::sqrt(400.0 * 200))));

  const double d = 200, s = 40, t = delta * s;
  const double raised = (1 + (1 - delta) * (1 - delta) / delta) / d;
  const double lowered = delta / d;
  const std::size_t m = 40 - 16;
  const double var_delta = std::pow((1 - delta) / d, 2) * m * (1 - delta) / delta;
  const double thr = gamma * s / (d * std::sqrt(t));

  const int draws = 100000;
  int good = 0;
  double l1_sum = 0.0, l1_sq = 0.0;
  for (int r = 0; r < draws; ++r) {
    const auto draw = sample_impossibility_prior(p, delta, gamma, r_n, SeedSpec{3, 0}.child(r));
    double total = 0.0;
    for (double x : draw.vector.values()) total += x;
    if (std::abs(total - 1.0) > 1e-12) FAIL("mass");
    l1_sum += draw.first_half_l1;
    l1_sq += draw.first_half_l1 * draw.first_half_l1;
    if (draw.on_good_event) {
      ++good;
      if (r < 2000) {
        std::size_t moved = 0;
        for (std::size_t j = 0; j < 100; ++j) {
          const double x = draw.vector[j];
          if (std::abs(x - 1.0 / d) > 1e-15) {
            ++moved;
            CHECK_UNARY(std::abs(x - raised) < 1e-15 || std::abs(x - lowered) < 1e-15);
          }
        }
        CHECK(moved == m);
        CHECK(l0_distance_to_uniform(draw.vector, 1e-15) <= 40);
        CHECK(l1_distance_to_uniform(draw.vector) ==
              doctest::Approx(draw.first_half_l1 + std::abs(draw.delta_mass)).epsilon(1e-10));
      }
    } else if (r < 2000) {
      CHECK(l1_distance_to_uniform(draw.vector) == doctest::Approx(2 * r_n).epsilon(1e-9));
    }
  }
  const double bad_rate = 1.0 - good / double(draws);
  CHECK(bad_rate <= var_delta / (thr * thr) + 3 * std::sqrt(0.25 / draws));

  const double mean = l1_sum / draws;
  const double se = std::sqrt((l1_sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - expected_l1_of_impossibility_prior(p, delta)) <= 3 * se);

  // The default delta = 0.1 needs a much larger s.
  const ProblemParams big{40000, 40000, 10000, 0.1, 0.0};
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto draw = sample_impossibility_prior(big, 0.1, default_gamma_d(big), default_r_n(big), SeedSpec{4, 0}.child(r));
    CHECK(draw.vector.size() == 40000);
  }

  // floor(delta s) = 0 always takes the pair branch.
  const auto tiny = sample_impossibility_prior({400, 200, 4, 0.5, 0.0}, 0.1, 1.0, r_n, {1, 1});
  CHECK_FALSE(tiny.on_good_event);
  CHECK_THROWS_AS(sample_impossibility_prior(p, delta, 0.5, r_n, {1, 0}), DomainError);
  CHECK_THROWS_AS(sample_impossibility_prior(p, delta, gamma, 1.0, {1, 0}), DomainError);
}

TEST_CASE("expected L1 of the impossibility prior") {
  CHECK(expected_l1_of_impossibility_prior({1, 100, 10, 0.5, 0.0}, 0.2) == doctest::Approx(0.1024).epsilon(1e-14));
  CHECK(expected_l1_of_impossibility_prior({1, 1000, 50, 0.5, 0.0}, 1e-9) == doctest::Approx(2 * 50 / 1000.0).epsilon(1e-8));
}

TEST_CASE("F_r threshold and function") {
  const std::uint64_t d = 10000;
  ProblemParams p = ProblemParams::from_alpha(100000, d, 0.7, 0.0);
  const double e2 = threshold_eps2(p);
  p.epsilon = e2;
  FrThreshold f = f_r_threshold(p);
  CHECK(f.c_star == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r == 1.0);
  CHECK(f.t_r == doctest::Approx(std::sqrt(2 * std::log(double(d)))).epsilon(1e-14));
  p.epsilon = e2 / 8;
  f = f_r_threshold(p);
  CHECK(f.c_star == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(f.r == doctest::Approx(0.5).epsilon(1e-14));

  const double t1 = std::sqrt(2 * std::log(double(d)));
  CHECK(f_r(0.0, 1.0, d) == doctest::Approx(2 * normal_upper_tail(t1).prob()).epsilon(1e-14));
  CHECK(f_r(t1, 1.0, d) <= 1.0);
  for (double y = 0.0; y <= t1; y += 0.1) CHECK(f_r(y, 0.3, d) > 0.0);
  // t_1 = 2 exactly when ln d = 2; d = 7 gives ln 7 = 1.9459.
  CHECK(std::sqrt(2.0 * 1.0 * 2.0) == 2.0);
}

TEST_CASE("variational identity") {
  const ProblemParams p{10000, 10000, 16, 0.7, 0.0};
  const VariationalCheck v = variational_check(p, 0.2, 2000);
  CHECK(v.passed);
  CHECK(v.relative_gap < 1e-6);
  CHECK(v.y_argmin == doctest::Approx(v.y_hat).epsilon(1e-4));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> c(0.05, 0.95);
  for (int i = 0; i < 20; ++i) CHECK(check_variational_identity(p, c(rng), 1000));
  CHECK_THROWS_AS(variational_check(p, 1.2, 2000), DomainError);
  CHECK_THROWS_AS(variational_check(p, 0.5, 10), DomainError);
}
