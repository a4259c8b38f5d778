#include "sparse_unif/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparse_unif/error.hpp"
#include "sparse_unif/parallel.hpp"

namespace sparse_unif {

namespace {

constexpr std::uint64_t kCalibrationTag = 0xCA11B4A7EULL;

double log_d(std::uint64_t d) { return std::log(static_cast<double>(d)); }

bool same_lambda(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::uint64_t exceedances(const Histogram& z, const DeviationCutoffs& cut) {
  std::uint64_t count = 0;
  const auto lower = cut.lower;
  const auto upper = cut.upper;
  for (std::uint64_t c : z.counts()) {
    const auto v = static_cast<std::int64_t>(c);
    count += (v >= upper || v <= lower) ? 1 : 0;
  }
  return count;
}

void check_degenerate(double p0, double t) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw DomainError("degenerate GHC threshold t = " + std::to_string(t) + ": null exceedance probability is " +
                      std::to_string(p0));
  }
}

void check_histogram(const Histogram& z, std::uint64_t d) {
  if (z.size() != d) {
    throw DomainError("histogram has " + std::to_string(z.size()) + " categories, expected d = " + std::to_string(d));
  }
}

}  // namespace

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::ChiSq: return "chisq";
    case StatisticKind::MaxStd: return "max_std";
    case StatisticKind::MaxCount: return "max_count";
    case StatisticKind::GHC: return "ghc";
    case StatisticKind::Combined: return "combined";
  }
  return "unknown";
}

StatisticKind parse_statistic(const std::string& name) {
  if (name == "chisq" || name == "chi_sq") return StatisticKind::ChiSq;
  if (name == "max_std" || name == "maxstd") return StatisticKind::MaxStd;
  if (name == "max_count" || name == "maxcount") return StatisticKind::MaxCount;
  if (name == "ghc") return StatisticKind::GHC;
  if (name == "combined") return StatisticKind::Combined;
  throw ConfigError("unknown statistic '" + name + "' (expected chisq|max_std|max_count|ghc|combined)");
}

NullTailTable::NullTailTable(double lambda, const std::vector<double>& thresholds, bool normal_approximation)
    : lambda_(lambda) {
  if (!(lambda > 0.0)) throw DomainError("null mean n/d must be positive");
  for (double t : thresholds) {
    LogProb p = normal_approximation ? LogProb(std::log(2.0) + normal_upper_tail(t).log())
                                     : abs_deviation_tail(t, lambda);
    entries_.emplace(t, p);
  }
}

LogProb NullTailTable::at(double t) const {
  auto it = entries_.find(t);
  if (it == entries_.end()) throw ConfigError("threshold t = " + std::to_string(t) + " not in null tail table");
  return it->second;
}

// ---- chi-square ------------------------------------------------------------------

double chi_sq_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d) {
  check_histogram(z, d);
  const double mean = static_cast<double>(n) / static_cast<double>(d);
  double sum = 0.0;
  double carry = 0.0;
  for (std::uint64_t c : z.counts()) {
    const double x = static_cast<double>(c);
    const double term = (x - mean) * (x - mean) - x;
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

ChiSqMoments chi_sq_moments(const ProbabilityVector& p, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  const double d = static_cast<double>(p.size());
  double var = 0.0;
  for (double pj : p.values()) {
    const double delta = 1.0 / d - pj;
    const double d2 = delta * delta;
    var += 2.0 * nn * nn / (d * d) + 2.0 * nn * nn * d2 + 4.0 * nn * nn * nn * d2 / d - 4.0 * nn * nn * nn * d2 * delta;
  }
  return {nn * nn * l2_distance_sq_to_uniform(p), var};
}

TestReport chi_sq_test_analytic(const Histogram& z, const ProblemParams& params) {
  return CalibratedTest::analytic(StatisticKind::ChiSq, params).evaluate(z);
}

// ---- max tests -----------------------------------------------------------------

double max_std_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d) {
  check_histogram(z, d);
  const double mean = static_cast<double>(n) / static_cast<double>(d);
  if (!(mean > 0.0)) throw DomainError("max_std_statistic needs n/d > 0");
  double worst = 0.0;
  for (std::uint64_t c : z.counts()) worst = std::max(worst, std::abs(static_cast<double>(c) - mean));
  return worst / std::sqrt(mean);
}

double max_count_statistic(const Histogram& z) {
  return static_cast<double>(*std::max_element(z.counts().begin(), z.counts().end()));
}

TestReport max_tests_analytic(const Histogram& z, const ProblemParams& params, const MaxTestOptions& options) {
  TestOptions opts;
  opts.max = options;
  CalibratedTest std_test = CalibratedTest::analytic(StatisticKind::MaxStd, params, opts);
  CalibratedTest count_test = CalibratedTest::analytic(StatisticKind::MaxCount, params, opts);
  TestReport out;
  out.statistic = StatisticKind::Combined;
  out.calibration = Calibration::analytic();
  out.components = {std_test.evaluate(z), count_test.evaluate(z)};
  for (const auto& c : out.components) out.value += c.reject ? 1.0 : 0.0;
  out.cutoff = 0.0;
  out.reject = out.value > out.cutoff;
  return out;
}

// ---- GHC -----------------------------------------------------------------------

std::vector<double> ghc_grid(std::uint64_t d) {
  const double limit = 10.0 * log_d(d);
  std::vector<double> grid;
  for (double t = 1.0; t * t < limit; t += 1.0) grid.push_back(t);
  return grid;
}

double ghc_statistic(const Histogram& z, std::uint64_t n, std::uint64_t d, double t, const NullTailTable& table) {
  check_histogram(z, d);
  const double lambda = static_cast<double>(n) / static_cast<double>(d);
  if (!same_lambda(lambda, table.lambda())) throw DomainError("null tail table was built for a different n/d");
  const double p0 = table.at(t).prob();
  check_degenerate(p0, t);
  const double dd = static_cast<double>(d);
  const double count = static_cast<double>(exceedances(z, deviation_cutoffs(t, lambda)));
  return (count - dd * p0) / std::sqrt(dd * p0 * (1.0 - p0));
}

GhcEvaluator::GhcEvaluator(std::uint64_t n, std::uint64_t d, const GhcOptions& options)
    : n_(n),
      d_(d),
      options_(options),
      thresholds_(ghc_grid(d)),
      table_(static_cast<double>(n) / static_cast<double>(d), thresholds_, options.normal_approximation) {
  if (thresholds_.empty()) throw ConfigError("GHC grid is empty for d = " + std::to_string(d) + " (need 10 ln d > 1)");
  const double dd = static_cast<double>(d);
  for (double t : thresholds_) {
    const double p0 = table_.at(t).prob();
    check_degenerate(p0, t);
    cutoffs_.push_back(deviation_cutoffs(t, table_.lambda()));
    centre_.push_back(dd * p0);
    scale_.push_back(std::sqrt(dd * p0 * (1.0 - p0)));
  }
}

std::vector<GhcPoint> GhcEvaluator::profile(const Histogram& z) const {
  check_histogram(z, d_);
  const std::size_t m = thresholds_.size();
  std::vector<std::uint64_t> counts(m, 0);
  for (std::uint64_t c : z.counts()) {
    const auto v = static_cast<std::int64_t>(c);
    for (std::size_t i = 0; i < m; ++i) counts[i] += (v >= cutoffs_[i].upper || v <= cutoffs_[i].lower) ? 1 : 0;
  }
  std::vector<GhcPoint> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = {thresholds_[i], (static_cast<double>(counts[i]) - centre_[i]) / scale_[i]};
  }
  return out;
}

double GhcEvaluator::grid_value(const Histogram& z) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pt : profile(z)) best = std::max(best, options_.one_sided ? pt.value : std::abs(pt.value));
  return best;
}

TestReport ghc_grid_test(const Histogram& z, const ProblemParams& params, const GhcOptions& options) {
  TestOptions opts;
  opts.ghc = options;
  return CalibratedTest::analytic(StatisticKind::GHC, params, opts).evaluate(z);
}

// ---- calibration -----------------------------------------------------------------

double empirical_cutoff(std::vector<double> values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("calibration level must lie in (0,1)");
  if (values.empty()) throw DomainError("calibration needs at least one null replication");
  const double b1 = static_cast<double>(values.size() + 1);
  // The 1e-9 slack keeps exact products such as 0.95 * 100 from rounding up.
  const auto rank = static_cast<std::size_t>(std::ceil((1.0 - level) * b1 - 1e-9));
  if (rank > values.size()) return std::numeric_limits<double>::infinity();
  const std::size_t idx = rank == 0 ? 0 : rank - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
  return values[idx];
}

EmpiricalCutoff randomized_empirical_cutoff(std::vector<double> values, double level) {
  const std::size_t b = values.size();
  const double c = empirical_cutoff(values, level);
  if (std::isinf(c)) return {c, 0.0};
  const auto m = static_cast<double>(b + 1) - std::ceil((1.0 - level) * static_cast<double>(b + 1) - 1e-9);
  double above = 0.0, tied = 0.0;
  for (double v : values) {
    if (v > c) above += 1.0;
    else if (v == c) tied += 1.0;
  }
  return {c, std::clamp((m - above) / (tied + 1.0), 0.0, 1.0)};
}

std::vector<std::vector<double>> null_statistic_draws(const std::vector<StatisticFn>& statistics,
                                                      const ProblemParams& params, std::uint64_t replications,
                                                      const SeedSpec& seed, SamplingScheme scheme, unsigned threads) {
  params.validate();
  if (replications == 0) throw DomainError("calibration needs B >= 1");
  std::vector<std::vector<double>> out(statistics.size(), std::vector<double>(replications));
  parallel_for(replications, threads, [&](std::size_t b) {
    const Histogram h = sample_null(params.d, params.n, scheme, seed.child(b, kCalibrationTag));
    for (std::size_t s = 0; s < statistics.size(); ++s) out[s][b] = statistics[s](h);
  });
  return out;
}

double calibrate_null(const StatisticFn& statistic, const ProblemParams& params, double level,
                      std::uint64_t replications, const SeedSpec& seed, SamplingScheme scheme, unsigned threads) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("calibration level must lie in (0,1)");
  auto draws = null_statistic_draws({statistic}, params, replications, seed, scheme, threads);
  return empirical_cutoff(std::move(draws[0]), level);
}

// ---- CalibratedTest ------------------------------------------------------------

CalibratedTest::CalibratedTest(StatisticKind kind, const ProblemParams& params, const TestOptions& options)
    : kind_(kind), params_(params), options_(options) {
  params_.validate();
  if (kind == StatisticKind::GHC || kind == StatisticKind::Combined) {
    ghc_.emplace(params.n, params.d, options.ghc);
  }
}

namespace {

std::vector<StatisticKind> components_of(StatisticKind kind) {
  if (kind == StatisticKind::Combined) return {StatisticKind::MaxStd, StatisticKind::MaxCount, StatisticKind::GHC};
  return {kind};
}

}  // namespace

CalibratedTest CalibratedTest::analytic(StatisticKind kind, const ProblemParams& params, const TestOptions& options) {
  CalibratedTest test(kind, params, options);
  test.calibration_ = Calibration::analytic();
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  for (StatisticKind c : components_of(kind)) {
    double cutoff = 0.0;
    switch (c) {
      case StatisticKind::ChiSq:
        if (!(params.epsilon > 0.0)) throw DomainError("analytic chi-square cutoff needs epsilon > 0");
        cutoff = n * n * params.epsilon * params.epsilon / (4.0 * static_cast<double>(params.s));
        break;
      case StatisticKind::MaxStd:
        if (!(options.max.c > 1.0)) throw DomainError("max-test constant C must exceed 1");
        if (params.d < 2) throw DomainError("max tests need d >= 2");
        cutoff = std::sqrt(2.0 * options.max.c * std::log(d));
        break;
      case StatisticKind::MaxCount:
        cutoff = options.max.count_factor * n / d;
        break;
      case StatisticKind::GHC:
        cutoff = std::log(d);
        break;
      case StatisticKind::Combined:
        break;
    }
    test.cutoffs_.emplace_back(c, cutoff);
  }
  return test;
}

CalibratedTest CalibratedTest::monte_carlo(StatisticKind kind, const ProblemParams& params, double level,
                                           std::uint64_t replications, const SeedSpec& seed, SamplingScheme scheme,
                                           const TestOptions& options, unsigned threads) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("calibration level must lie in (0,1)");
  CalibratedTest test(kind, params, options);
  test.calibration_ = Calibration::monte_carlo(replications, level);
  const auto parts = components_of(kind);
  std::vector<StatisticFn> fns;
  for (StatisticKind c : parts) {
    fns.emplace_back([&test, c](const Histogram& h) { return test.component_value(c, h, nullptr); });
  }
  auto draws = null_statistic_draws(fns, params, replications, seed, scheme, threads);
  const double component_level = level / static_cast<double>(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const EmpiricalCutoff cut = randomized_empirical_cutoff(std::move(draws[i]), component_level);
    test.cutoffs_.emplace_back(parts[i], cut.cutoff);
    test.tie_reject_.push_back(cut.tie_reject);
  }
  return test;
}

double CalibratedTest::component_value(StatisticKind kind, const Histogram& z, std::vector<GhcPoint>* per_t) const {
  switch (kind) {
    case StatisticKind::ChiSq: return chi_sq_statistic(z, params_.n, params_.d);
    case StatisticKind::MaxStd: return max_std_statistic(z, params_.n, params_.d);
    case StatisticKind::MaxCount: check_histogram(z, params_.d); return max_count_statistic(z);
    case StatisticKind::GHC: {
      auto prof = ghc_->profile(z);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& pt : prof) best = std::max(best, ghc_->one_sided() ? pt.value : std::abs(pt.value));
      if (per_t) *per_t = std::move(prof);
      return best;
    }
    case StatisticKind::Combined: break;
  }
  throw ConfigError("combined test has no single statistic value");
}

namespace {

// Tie-breaking uniform keyed on the histogram itself, so a decision is a
// deterministic function of (test, data) yet independent of the tie geometry.
double tie_uniform(const Histogram& z, StatisticKind kind) {
  std::uint64_t h = splitmix64(0x7135B4EA4ULL ^ static_cast<std::uint64_t>(kind));
  for (std::uint64_t c : z.counts()) h = splitmix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

TestReport CalibratedTest::component_report(std::size_t component, const Histogram& z) const {
  const auto [kind, cutoff] = cutoffs_[component];
  TestReport r;
  r.statistic = kind;
  r.calibration = calibration_;
  if (calibration_.kind == Calibration::Kind::MonteCarlo && kind_ == StatisticKind::Combined) {
    r.calibration.level = calibration_.level / 3.0;
  }
  r.cutoff = cutoff;
  if (kind == StatisticKind::GHC) {
    std::vector<GhcPoint> prof;
    r.value = component_value(kind, z, &prof);
    r.per_t = std::move(prof);
  } else {
    r.value = component_value(kind, z, nullptr);
  }
  if (!tie_reject_.empty()) {
    r.reject = r.value > r.cutoff || (r.value == r.cutoff && tie_uniform(z, kind) < tie_reject_[component]);
  } else {
    r.reject = kind == StatisticKind::ChiSq ? r.value >= r.cutoff : r.value > r.cutoff;
  }
  return r;
}

TestReport CalibratedTest::evaluate(const Histogram& z) const {
  if (kind_ != StatisticKind::Combined) return component_report(0, z);
  TestReport out;
  out.statistic = StatisticKind::Combined;
  out.calibration = calibration_;
  for (std::size_t i = 0; i < cutoffs_.size(); ++i) {
    out.components.push_back(component_report(i, z));
    if (out.components.back().reject) out.value += 1.0;
    if (cutoffs_[i].first == StatisticKind::GHC) out.per_t = out.components.back().per_t;
  }
  out.cutoff = 0.0;
  out.reject = out.value > out.cutoff;
  return out;
}

TestReport combined_test(const Histogram& z, const ProblemParams& params, CombinedMode mode, double level,
                         std::uint64_t replications, const SeedSpec& seed, SamplingScheme scheme,
                         const TestOptions& options, unsigned threads) {
  if (mode == CombinedMode::Analytic) {
    return CalibratedTest::analytic(StatisticKind::Combined, params, options).evaluate(z);
  }
  return CalibratedTest::monte_carlo(StatisticKind::Combined, params, level, replications, seed, scheme, options,
                                     threads)
      .evaluate(z);
}

}  // namespace sparse_unif
