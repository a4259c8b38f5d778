#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sparse_unif/error.hpp"
#include "sparse_unif/harness.hpp"
#include "sparse_unif/io.hpp"

using namespace sparse_unif;

namespace {

PhaseGridSpec small_dense() {
  PhaseGridSpec spec;
  spec.d = 200;
  spec.alpha_range = {0.0, 0.5, 4, false};
  spec.beta_range = {0.0, 0.5, 4, false};
  spec.reps = 40;
  spec.calibration_B = 199;
  spec.seed = {99, 0};
  return spec;
}

}  // namespace

TEST_CASE("axis ranges") {
  CHECK(AxisRange{0.0, 0.5, 3, false}.points() == std::vector<double>{0.0, 0.25, 0.5});
  const auto open = AxisRange{0.5, 1.0, 5, true}.points();
  CHECK(open.front() == doctest::Approx(0.55));
  CHECK(open.back() == doctest::Approx(0.95));
  CHECK(AxisRange{0.3, 0.3, 1, false}.points() == std::vector<double>{0.3});
  CHECK_THROWS_AS((AxisRange{0.0, 1.0, 0, false}.points()), ConfigError);
  CHECK_THROWS_AS((AxisRange{1.0, 0.0, 2, false}.points()), ConfigError);
}

TEST_CASE("n rules and sparsity") {
  CHECK(NRule{}.resolve(500) == 500);
  CHECK((NRule{NRule::Kind::PowerOfD, 1.4, 0}.resolve(2000)) == static_cast<std::uint64_t>(std::round(std::pow(2000.0, 1.4))));
  CHECK((NRule{NRule::Kind::Fixed, 1.0, 77}.resolve(2000)) == 77);
  CHECK_THROWS_AS((NRule{NRule::Kind::Fixed, 1.0, 0}.resolve(5)), ConfigError);
  CHECK(even_sparsity(2000, 0.0) == 2000);
  CHECK(even_sparsity(100, 0.5) == 10);
  CHECK(even_sparsity(1000, 1.0) == 2);
  CHECK(even_sparsity(1000, 0.9) % 2 == 0);
}

TEST_CASE("boundary curves") {
  CHECK(boundary_beta(Density::Dense, 0.0) == 0.25);
  CHECK(boundary_beta(Density::Dense, 0.5) == 0.0);
  CHECK(boundary_beta(Density::Sparse, 0.75) == doctest::Approx(0.25));
}

TEST_CASE("cell parametrisations") {
  PhaseGridSpec spec = small_dense();
  const ProblemParams dense = cell_params(spec, 0.2, 0.1);
  CHECK(dense.epsilon == doctest::Approx(std::pow(200.0, 0.1) / std::sqrt(200.0)));
  spec.regime = Density::Sparse;
  spec.n_rule = {NRule::Kind::Fixed, 1.0, 5000};
  const ProblemParams sparse = cell_params(spec, 0.8, 0.3);
  CHECK(sparse.epsilon == doctest::Approx(sparse.s * std::sqrt(2 * 0.3 * std::log(200.0) / (5000.0 * 200))));
  // Dense feasibility is alpha + beta <= 1/2 when n = d.
  PhaseGridSpec big = small_dense();
  big.d = 100000;
  CHECK(block_alternative_feasible(cell_params(big, 0.2, 0.29)));
  CHECK_FALSE(block_alternative_feasible(cell_params(big, 0.2, 0.31)));
}

TEST_CASE("power cells") {
  const ProblemParams p{2000, 200, 2, 0.9, 0.0};
  const auto test = CalibratedTest::monte_carlo(StatisticKind::ChiSq, p, 0.05, 999, {1, 0}, SamplingScheme::Multinomial);
  const PowerEstimate null = run_power_cell(ProbabilityVector::uniform(200), p, test, 2000, SamplingScheme::Multinomial, {2, 0}, 4);
  // Cutoff noise from B = 999 adds its own binomial variance.
  CHECK(std::abs(null.power - 0.05) <= 3 * std::sqrt(0.05 * 0.95 * (1.0 / 2000 + 1.0 / 1000)));
  CHECK(null.se == doctest::Approx(std::sqrt(null.power * (1 - null.power) / 2000)));
  const ProblemParams strong{2000, 200, 200, 0.0, 0.5};
  const PowerEstimate hit = run_power_cell(make_block_alternative(strong), strong, test, 200, SamplingScheme::Multinomial, {3, 0});
  CHECK(hit.power >= 0.9);
  CHECK_THROWS_AS(run_power_cell(ProbabilityVector::uniform(200), p, test, 0, SamplingScheme::Multinomial, {2, 0}), DomainError);
  CHECK(run_power_cell(ProbabilityVector::uniform(200), p, test, 300, SamplingScheme::Multinomial, {2, 0}, 1).power ==
        run_power_cell(ProbabilityVector::uniform(200), p, test, 300, SamplingScheme::Multinomial, {2, 0}, 7).power);
}

TEST_CASE("phase diagram") {
  const PhaseGridSpec spec = small_dense();
  const PowerGrid g1 = run_phase_diagram(spec, 1);
  const PowerGrid g8 = run_phase_diagram(spec, 8);
  CHECK(grid_to_csv(g1) == grid_to_csv(g8));
  CHECK(g1.cells.size() == 16);
  CHECK(g1.boundary_curve.size() == 4);
  bool any_infeasible = false;
  for (const auto& c : g1.cells) {
    if (c.feasible) {
      CHECK(c.power >= 0.0);
      CHECK(c.power <= 1.0);
      CHECK(c.reps == 40);
    } else {
      any_infeasible = true;
      CHECK(std::isnan(c.power));
    }
  }
  CHECK(any_infeasible);

  PhaseGridSpec one = spec;
  one.alpha_range = {0.1, 0.1, 1, false};
  one.beta_range = {0.2, 0.2, 1, false};
  CHECK(run_phase_diagram(one).cells.size() == 1);

  PhaseGridSpec analytic = spec;
  analytic.calibration = Calibration::Kind::Analytic;
  CHECK(run_phase_diagram(analytic).cells.size() == 16);

  PhaseGridSpec bad = spec;
  bad.reps = 0;
  CHECK_THROWS_AS(run_phase_diagram(bad), ConfigError);
}
