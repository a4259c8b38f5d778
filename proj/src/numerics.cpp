#include "sparse_unif/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sparse_unif/error.hpp"

namespace sparse_unif {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Relative size below which further series terms are dropped.
constexpr double kSeriesEps = 1e-18;

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("Poisson mean must be positive and finite, got " + std::to_string(lambda));
  }
}

// ln sum_{j=0}^{k} pmf(j) for k < lambda: terms shrink going down from k.
double log_lower_sum(std::int64_t k, double lambda) {
  double sum = 1.0;
  double term = 1.0;
  for (std::int64_t j = k; j > 0; --j) {
    term *= static_cast<double>(j) / lambda;
    sum += term;
    if (term < kSeriesEps * sum) break;
  }
  return poisson_pmf(k, lambda).log() + std::log(sum);
}

// ln sum_{j>=m} pmf(j) for m > lambda: terms shrink going up from m.
double log_upper_sum(std::int64_t m, double lambda) {
  double sum = 1.0;
  double term = 1.0;
  for (std::int64_t j = m + 1;; ++j) {
    term *= lambda / static_cast<double>(j);
    sum += term;
    if (term < kSeriesEps * sum) break;
  }
  return poisson_pmf(m, lambda).log() + std::log(sum);
}

double snap_tolerance(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

}  // namespace

double LogProb::prob() const { return std::exp(value_); }

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (hi == kNegInf) return kNegInf;
  if (std::isinf(hi)) return hi;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

double log1m_exp(double x) {
  if (x > 0.0) throw DomainError("log1m_exp requires x <= 0");
  // Split point ln 2 keeps both branches accurate.
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw DomainError("log_factorial of negative argument");
  if (n < 2) return 0.0;
  return log_gamma(static_cast<double>(n) + 1.0);
}

double log_choose(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

LogProb poisson_pmf(std::int64_t k, double lambda) {
  check_lambda(lambda);
  if (k < 0) throw DomainError("Poisson count must be nonnegative");
  return LogProb(-lambda + static_cast<double>(k) * std::log(lambda) - log_factorial(k));
}

LogProb poisson_cdf(std::int64_t k, double lambda) {
  check_lambda(lambda);
  if (k < 0) return LogProb::zero();
  if (static_cast<double>(k) < lambda) return LogProb(log_lower_sum(k, lambda));
  return LogProb(log1m_exp(log_upper_sum(k + 1, lambda)));
}

LogProb poisson_sf(std::int64_t k, double lambda) {
  check_lambda(lambda);
  if (k <= 0) return LogProb::one();
  if (static_cast<double>(k) > lambda) return LogProb(log_upper_sum(k, lambda));
  return LogProb(log1m_exp(log_lower_sum(k - 1, lambda)));
}

DeviationCutoffs deviation_cutoffs(double t, double lambda) {
  check_lambda(lambda);
  if (!(t >= 0.0)) throw DomainError("deviation threshold must be nonnegative");
  if (t == 0.0) return {0, -1};
  const double root = std::sqrt(lambda);
  const double hi = lambda + t * root;
  const double lo = lambda - t * root;
  constexpr double kMaxCount = 9.0e18;
  DeviationCutoffs out{};
  out.upper = hi >= kMaxCount ? std::numeric_limits<std::int64_t>::max()
                              : static_cast<std::int64_t>(std::ceil(hi - snap_tolerance(hi)));
  out.lower = lo < -snap_tolerance(lo) ? -1 : static_cast<std::int64_t>(std::floor(lo + snap_tolerance(lo)));
  return out;
}

LogProb abs_deviation_tail(double t, double lambda) {
  if (!(t >= 0.0)) throw DomainError("deviation threshold must be nonnegative, got " + std::to_string(t));
  check_lambda(lambda);
  if (t == 0.0) return LogProb::one();
  if (std::isinf(t)) return LogProb::zero();
  const auto cut = deviation_cutoffs(t, lambda);
  const double upper = cut.upper == std::numeric_limits<std::int64_t>::max() ? kNegInf
                                                                             : poisson_sf(cut.upper, lambda).log();
  const double lower = poisson_cdf(cut.lower, lambda).log();
  return LogProb(std::min(0.0, log_add_exp(upper, lower)));
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

LogProb normal_upper_tail(double x) {
  if (std::isnan(x)) return LogProb(x);
  if (x == std::numeric_limits<double>::infinity()) return LogProb::zero();
  if (x < 35.0) return LogProb(std::log(0.5 * std::erfc(x / std::numbers::sqrt2)));
  // Mills-ratio asymptotic series: sum_k (-1)^k (2k-1)!! / x^{2k}.
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2;
    series += term;
  }
  return LogProb(-0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(x) + std::log(series));
}

LogProb hypergeometric_pmf(std::int64_t k, std::int64_t pop, std::int64_t succ, std::int64_t draws) {
  if (pop < 0 || succ < 0 || draws < 0 || succ > pop || draws > pop) {
    throw DomainError("inconsistent hypergeometric parameters (pop=" + std::to_string(pop) +
                      ", succ=" + std::to_string(succ) + ", draws=" + std::to_string(draws) + ")");
  }
  const std::int64_t lo = std::max<std::int64_t>(0, draws + succ - pop);
  const std::int64_t hi = std::min(succ, draws);
  if (k < lo || k > hi) return LogProb::zero();
  const double v = log_choose(succ, k) + log_choose(pop - succ, draws - k) - log_choose(pop, draws);
  return LogProb(std::min(0.0, v));
}

}  // namespace sparse_unif
