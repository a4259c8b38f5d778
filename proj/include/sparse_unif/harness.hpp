#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sparse_unif/model.hpp"
#include "sparse_unif/rng.hpp"
#include "sparse_unif/sampling.hpp"
#include "sparse_unif/statistics.hpp"

namespace sparse_unif {

/// One axis of a phase grid. Closed ranges are an inclusive linspace; open
/// ranges use cell centres lo + (i + 1/2)(hi - lo)/steps.
struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t steps = 1;
  bool open = false;

  std::vector<double> points() const;
};

struct NRule {
  enum class Kind { EqualsD, PowerOfD, Fixed };
  Kind kind = Kind::EqualsD;
  double exponent = 1.0;  // PowerOfD: n = round(d^exponent)
  std::uint64_t n = 0;    // Fixed

  std::uint64_t resolve(std::uint64_t d) const;
};

struct PhaseGridSpec {
  Density regime = Density::Dense;
  AxisRange alpha_range{0.0, 0.5, 20, false};
  AxisRange beta_range{0.0, 0.5, 20, false};
  std::uint64_t d = 2000;
  NRule n_rule;
  std::uint64_t reps = 200;
  double level = 0.05;
  std::uint64_t calibration_B = 999;
  SamplingScheme scheme = SamplingScheme::Multinomial;
  SeedSpec seed;
  StatisticKind test = StatisticKind::ChiSq;
  Calibration::Kind calibration = Calibration::Kind::MonteCarlo;
  TestOptions options;

  /// Throws ConfigError on empty ranges, zero reps or an out-of-range level.
  void validate() const;
};

struct PowerCell {
  double alpha = 0.0;
  double beta = 0.0;
  double power = 0.0;  // NaN when infeasible
  double se = 0.0;
  std::uint64_t reps = 0;
  bool feasible = true;

  friend bool operator==(const PowerCell&, const PowerCell&) = default;
};

struct PowerGrid {
  std::uint64_t alpha_steps = 0;
  std::uint64_t beta_steps = 0;
  /// Alpha-major: cell (i, j) lives at i * beta_steps + j.
  std::vector<PowerCell> cells;
  std::vector<std::pair<double, double>> boundary_curve;
};

/// beta = 1/4 - alpha/2 (dense) or beta = C(alpha) (sparse).
double boundary_beta(Density regime, double alpha);

/// round(d^{1-alpha}) bumped to the nearest even value >= 2.
std::uint64_t even_sparsity(std::uint64_t d, double alpha);

/// Problem parameters of cell (alpha, beta): eps = d^beta / sqrt(n) (dense)
/// or eps = s sqrt(2 beta ln d / (n d)) (sparse).
ProblemParams cell_params(const PhaseGridSpec& spec, double alpha, double beta);

struct PowerEstimate {
  double power;
  double se;
  std::uint64_t reps;
};

/// Rejection frequency of `test` over `reps` draws from p_alt.
PowerEstimate run_power_cell(const ProbabilityVector& p_alt, const ProblemParams& params, const CalibratedTest& test,
                             std::uint64_t reps, SamplingScheme scheme, const SeedSpec& seed, unsigned threads = 1);

/// Calibrates once for (d, n, test), then evaluates every feasible cell.
/// Output is identical for any thread count.
PowerGrid run_phase_diagram(const PhaseGridSpec& spec, unsigned threads = 1);

}  // namespace sparse_unif
