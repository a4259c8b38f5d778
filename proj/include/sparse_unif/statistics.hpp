#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparse_unif/model.hpp"
#include "sparse_unif/numerics.hpp"
#include "sparse_unif/sampling.hpp"

namespace sparse_unif {

enum class StatisticKind { ChiSq, MaxStd, MaxCount, GHC, Combined };

std::string to_string(StatisticKind kind);
StatisticKind parse_statistic(const std::string& name);

struct Calibration {
  enum class Kind { Analytic, MonteCarlo };
  Kind kind = Kind::Analytic;
  std::uint64_t replications = 0;  // B
  double level = 0.0;

  static Calibration analytic() { return {}; }
  static Calibration monte_carlo(std::uint64_t b, double level) { return {Kind::MonteCarlo, b, level}; }
};

struct GhcPoint {
  double t;
  double value;
};

struct TestReport {
  StatisticKind statistic = StatisticKind::ChiSq;
  double value = 0.0;
  double cutoff = 0.0;
  bool reject = false;
  Calibration calibration;
  std::optional<std::vector<GhcPoint>> per_t;
  /// Sub-decisions of a union test; not part of the serialised form.
  std::vector<TestReport> components;
};

/// P_H0(|D_1| >= t) for a set of thresholds at a fixed null mean n/d.
class NullTailTable {
 public:
  NullTailTable(double lambda, const std::vector<double>& thresholds, bool normal_approximation = false);

  double lambda() const { return lambda_; }
  const std::map<double, LogProb>& entries() const { return entries_; }
  /// Throws ConfigError when t was not tabulated.
  LogProb at(double t) const;

 private:
  double lambda_;
  std::map<double, LogProb> entries_;
};

// ---- chi-square type statistic ----------------------------------------------

/// T_n = sum_j (Z_j - n/d)^2 - Z_j.
double chi_sq_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d);

struct ChiSqMoments {
  double mean;
  double variance;
};
/// Exact Poissonized mean and variance of T_n under p.
ChiSqMoments chi_sq_moments(const ProbabilityVector& p, std::uint64_t n);

/// Rejects iff T_n >= n^2 eps^2 / (4 s).
TestReport chi_sq_test_analytic(const Histogram& z, const ProblemParams& params);

// ---- maximum type statistics ------------------------------------------------

/// M_{n,d} = max_j |Z_j - n/d| / sqrt(n/d).
double max_std_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d);
double max_count_statistic(const Histogram& z);

struct MaxTestOptions {
  double c = 1.2;              // threshold sqrt(2 C ln d), C > 1
  double count_factor = 10.0;  // max count cutoff count_factor * n/d
};

/// Union of {M_{n,d} > sqrt(2 C ln d)} and {max_j Z_j > 10 n/d}. The report
/// is a union report: value = number of branches fired, cutoff = 0, and
/// components = [MaxStd, MaxCount].
TestReport max_tests_analytic(const Histogram& z, const ProblemParams& params, const MaxTestOptions& options = {});

// ---- higher criticism ------------------------------------------------------

struct GhcOptions {
  bool one_sided = false;             // reject on GHC(t) rather than |GHC(t)|
  bool normal_approximation = false;  // p0(t) = 2 PhiBar(t) instead of the exact Poisson tail
};

/// Integer thresholds t >= 1 with t^2 < 10 ln d.
std::vector<double> ghc_grid(std::uint64_t d);

/// Standardised exceedance count at threshold t.
double ghc_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d, double t, const NullTailTable& table);

/// Precomputed thresholds, null tails and count cutoffs for fast repeated
/// evaluation of max_t |GHC(t)| over the integer grid.
class GhcEvaluator {
 public:
  GhcEvaluator(std::uint64_t n, std::uint64_t d, const GhcOptions& options = {});

  const NullTailTable& table() const { return table_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  bool one_sided() const { return options_.one_sided; }

  /// GHC(t) for every grid point.
  std::vector<GhcPoint> profile(const Histogram& z) const;
  /// max_t |GHC(t)| (or max_t GHC(t) when one-sided).
  double grid_value(const Histogram& z) const;

 private:
  std::uint64_t n_;
  std::uint64_t d_;
  GhcOptions options_;
  std::vector<double> thresholds_;
  NullTailTable table_;
  std::vector<DeviationCutoffs> cutoffs_;
  std::vector<double> centre_;  // d p0(t)
  std::vector<double> scale_;   // sqrt(d p0(t) (1 - p0(t)))
};

/// Rejects iff max_t |GHC(t)| > ln d over the integer grid.
TestReport ghc_grid_test(const Histogram& z, const ProblemParams& params, const GhcOptions& options = {});

// ---- calibration -----------------------------------------------------------

using StatisticFn = std::function<double(const Histogram&)>;

/// The ceil((1 - level)(B + 1))-th order statistic of `values` (1-based);
/// +inf when that rank exceeds B.
double empirical_cutoff(std::vector<double> values, double level);

/// The same cutoff c plus the probability of rejecting a value equal to c:
/// (m - #{v > c}) / (#{v == c} + 1) with m = floor(level (B + 1)). Rejecting
/// T > c, and T == c with that probability, gives size m / (B + 1) even for
/// lattice-valued statistics.
struct EmpiricalCutoff {
  double cutoff;
  double tie_reject;
};
EmpiricalCutoff randomized_empirical_cutoff(std::vector<double> values, double level);

/// Evaluates each statistic on B null histograms. Result is indexed
/// [statistic][replication] and identical for any thread count.
std::vector<std::vector<double>> null_statistic_draws(const std::vector<StatisticFn>& statistics,
                                                      const ProblemParams& params, std::uint64_t replications,
                                                      const SeedSpec& seed, SamplingScheme scheme,
                                                      unsigned threads = 1);

double calibrate_null(const StatisticFn& statistic, const ProblemParams& params, double level,
                      std::uint64_t replications, const SeedSpec& seed,
                      SamplingScheme scheme = SamplingScheme::Poissonized, unsigned threads = 1);

// ---- complete decision rules -------------------------------------------------

struct TestOptions {
  MaxTestOptions max;
  GhcOptions ghc;
};

/// A decision rule for one statistic with its cutoffs resolved, either from
/// the analytic thresholds or from empirical null quantiles.
class CalibratedTest {
 public:
  static CalibratedTest analytic(StatisticKind kind, const ProblemParams& params, const TestOptions& options = {});

  /// Monte-Carlo calibration at `level`; the combined test splits the level
  /// equally over its three max/GHC components.
  static CalibratedTest monte_carlo(StatisticKind kind, const ProblemParams& params, double level,
                                    std::uint64_t replications, const SeedSpec& seed, SamplingScheme scheme,
                                    const TestOptions& options = {}, unsigned threads = 1);

  TestReport evaluate(const Histogram& z) const;

  StatisticKind kind() const { return kind_; }
  const Calibration& calibration() const { return calibration_; }
  /// Cutoff per component statistic (one entry for simple tests).
  const std::vector<std::pair<StatisticKind, double>>& cutoffs() const { return cutoffs_; }
  /// Probability of rejecting a value equal to each cutoff (Monte-Carlo only).
  const std::vector<double>& tie_rejection() const { return tie_reject_; }

 private:
  CalibratedTest(StatisticKind kind, const ProblemParams& params, const TestOptions& options);
  double component_value(StatisticKind kind, const Histogram& z, std::vector<GhcPoint>* per_t) const;
  TestReport component_report(std::size_t component, const Histogram& z) const;

  StatisticKind kind_;
  ProblemParams params_;
  TestOptions options_;
  Calibration calibration_;
  std::optional<GhcEvaluator> ghc_;
  std::vector<std::pair<StatisticKind, double>> cutoffs_;
  std::vector<double> tie_reject_;
};

enum class CombinedMode { Analytic, MonteCarlo };

/// Bonferroni union of the two max tests and the GHC grid test.
TestReport combined_test(const Histogram& z, const ProblemParams& params, CombinedMode mode, double level = 0.05,
                         std::uint64_t replications = 999, const SeedSpec& seed = {},
                         SamplingScheme scheme = SamplingScheme::Poissonized, const TestOptions& options = {},
                         unsigned threads = 1);

}  // namespace sparse_unif
