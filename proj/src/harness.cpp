#include "sparse_unif/harness.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "sparse_unif/error.hpp"
#include "sparse_unif/parallel.hpp"

namespace sparse_unif {

namespace {

constexpr std::uint64_t kCellTag = 0xCE11ULL;
constexpr std::uint64_t kRepTag = 0x4E95ULL;
constexpr std::uint64_t kGridCalibrationTag = 0xCA1BULL;

}  // namespace

std::vector<double> AxisRange::points() const {
  if (steps == 0) throw ConfigError("grid range needs at least one step");
  if (!(lo <= hi)) throw ConfigError("grid range has lo > hi");
  std::vector<double> out(steps);
  const double width = hi - lo;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double k = static_cast<double>(i);
    if (open) {
      out[i] = lo + (k + 0.5) * width / static_cast<double>(steps);
    } else {
      out[i] = steps == 1 ? lo : lo + k * width / static_cast<double>(steps - 1);
    }
  }
  return out;
}

std::uint64_t NRule::resolve(std::uint64_t d) const {
  switch (kind) {
    case Kind::EqualsD: return d;
    case Kind::PowerOfD: {
      const double n = std::round(std::pow(static_cast<double>(d), exponent));
      if (!(n >= 1.0)) throw ConfigError("n_rule power_of_d gives n < 1");
      return static_cast<std::uint64_t>(n);
    }
    case Kind::Fixed:
      if (n == 0) throw ConfigError("n_rule fixed needs n >= 1");
      return n;
  }
  return d;
}

void PhaseGridSpec::validate() const {
  alpha_range.points();
  beta_range.points();
  if (d < 2) throw ConfigError("phase grid needs d >= 2");
  n_rule.resolve(d);
  if (reps == 0) throw ConfigError("phase grid needs reps >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
  if (calibration == Calibration::Kind::MonteCarlo && calibration_B == 0) {
    throw ConfigError("Monte-Carlo calibration needs calibration_B >= 1");
  }
  if (alpha_range.lo < 0.0 || alpha_range.hi > 1.0) throw ConfigError("alpha range must lie in [0,1]");
}

double boundary_beta(Density regime, double alpha) {
  return regime == Density::Dense ? 0.25 - alpha / 2.0 : c_alpha(alpha);
}

std::uint64_t even_sparsity(std::uint64_t d, double alpha) {
  std::uint64_t s = sparsity_from_alpha(d, alpha);
  if (s % 2 != 0) ++s;
  s = std::max<std::uint64_t>(s, 2);
  return std::min(s, d - d % 2);
}

ProblemParams cell_params(const PhaseGridSpec& spec, double alpha, double beta) {
  ProblemParams p;
  p.d = spec.d;
  p.n = spec.n_rule.resolve(spec.d);
  p.alpha = alpha;
  p.s = even_sparsity(spec.d, alpha);
  const double n = static_cast<double>(p.n);
  const double d = static_cast<double>(p.d);
  if (spec.regime == Density::Dense) {
    p.epsilon = std::pow(d, beta) / std::sqrt(n);
  } else {
    p.epsilon = static_cast<double>(p.s) * std::sqrt(2.0 * beta * std::log(d) / (n * d));
  }
  return p;
}

PowerEstimate run_power_cell(const ProbabilityVector& p_alt, const ProblemParams& params, const CalibratedTest& test,
                             std::uint64_t reps, SamplingScheme scheme, const SeedSpec& seed, unsigned threads) {
  if (reps == 0) throw DomainError("power estimate needs reps >= 1");
  if (p_alt.size() != params.d) throw DomainError("alternative has the wrong dimension");
  std::vector<unsigned char> rejected(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const Histogram z = sample_histogram(p_alt, params.n, scheme, seed.child(r, kRepTag));
    rejected[r] = test.evaluate(z).reject ? 1 : 0;
  });
  std::uint64_t hits = 0;
  for (unsigned char v : rejected) hits += v;
  const double power = static_cast<double>(hits) / static_cast<double>(reps);
  return {power, std::sqrt(power * (1.0 - power) / static_cast<double>(reps)), reps};
}

PowerGrid run_phase_diagram(const PhaseGridSpec& spec, unsigned threads) {
  spec.validate();
  const std::vector<double> alphas = spec.alpha_range.points();
  const std::vector<double> betas = spec.beta_range.points();

  PowerGrid grid;
  grid.alpha_steps = alphas.size();
  grid.beta_steps = betas.size();
  grid.cells.resize(alphas.size() * betas.size());
  for (double a : alphas) grid.boundary_curve.emplace_back(a, boundary_beta(spec.regime, a));

  // The null law depends on (d, n) only, so one Monte-Carlo calibration serves every cell.
  std::optional<CalibratedTest> shared;
  if (spec.calibration == Calibration::Kind::MonteCarlo) {
    ProblemParams base;
    base.d = spec.d;
    base.n = spec.n_rule.resolve(spec.d);
    shared.emplace(CalibratedTest::monte_carlo(spec.test, base, spec.level, spec.calibration_B,
                                               spec.seed.child(0, kGridCalibrationTag), spec.scheme, spec.options,
                                               threads));
  }

  parallel_for(grid.cells.size(), threads, [&](std::size_t idx) {
    const double alpha = alphas[idx / betas.size()];
    const double beta = betas[idx % betas.size()];
    PowerCell& cell = grid.cells[idx];
    cell.alpha = alpha;
    cell.beta = beta;
    const ProblemParams params = cell_params(spec, alpha, beta);
    if (!block_alternative_feasible(params)) {
      cell.feasible = false;
      cell.power = std::numeric_limits<double>::quiet_NaN();
      cell.se = std::numeric_limits<double>::quiet_NaN();
      cell.reps = 0;
      return;
    }
    const ProbabilityVector alt = make_block_alternative(params);
    const SeedSpec cell_seed = spec.seed.child(idx, kCellTag);
    PowerEstimate est{};
    if (shared) {
      est = run_power_cell(alt, params, *shared, spec.reps, spec.scheme, cell_seed);
    } else {
      const CalibratedTest local = CalibratedTest::analytic(spec.test, params, spec.options);
      est = run_power_cell(alt, params, local, spec.reps, spec.scheme, cell_seed);
    }
    cell.power = est.power;
    cell.se = est.se;
    cell.reps = est.reps;
  });
  return grid;
}

}  // namespace sparse_unif
