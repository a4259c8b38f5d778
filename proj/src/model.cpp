#include "sparse_unif/model.hpp"

#include <algorithm>
#include <cmath>

#include "sparse_unif/error.hpp"

namespace sparse_unif {

namespace {

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

// Rounding at the feasibility boundary can leave -1e-19 where 0 is meant.
double clamp_rounding(double x) { return (x < 0.0 && x > -1e-15) ? 0.0 : x; }

}  // namespace

std::uint64_t sparsity_from_alpha(std::uint64_t d, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
  if (d == 0) throw DomainError("d must be positive");
  const double s = std::round(std::pow(static_cast<double>(d), 1.0 - alpha));
  return std::clamp<std::uint64_t>(static_cast<std::uint64_t>(s), 1, d);
}

ProblemParams ProblemParams::from_alpha(std::uint64_t n, std::uint64_t d, double alpha, double epsilon) {
  ProblemParams p{n, d, sparsity_from_alpha(d, alpha), alpha, epsilon};
  p.validate();
  return p;
}

void ProblemParams::validate() const {
  if (n == 0) throw DomainError("sample size n must be positive");
  if (d == 0) throw DomainError("domain size d must be positive");
  if (s == 0 || s > d) throw DomainError("sparsity s must satisfy 1 <= s <= d");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be nonnegative");
}

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("probability vector must be nonempty");
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability entries must lie in [0,1]");
  }
  const double total = compensated_sum(probs_);
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("probability entries must sum to 1 (got " + std::to_string(total) + ")");
  }
}

ProbabilityVector ProbabilityVector::uniform(std::size_t d) {
  if (d == 0) throw DomainError("d must be positive");
  return ProbabilityVector(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

ProbabilityVector ProbabilityVector::point_mass(std::size_t d, std::size_t j) {
  if (j >= d) throw DomainError("point-mass index out of range");
  std::vector<double> v(d, 0.0);
  v[j] = 1.0;
  return ProbabilityVector(std::move(v));
}

double epsilon_max(std::uint64_t d, std::uint64_t s) {
  if (s < 2) throw DomainError("epsilon_max needs s >= 2: no s-sparse perturbation exists for s < 2");
  if (s > d) throw DomainError("epsilon_max needs s <= d");
  return 2.0 * static_cast<double>(s - 1) / static_cast<double>(d);
}

ProbabilityVector extremal_vector(std::uint64_t d, std::uint64_t s) {
  (void)epsilon_max(d, s);
  std::vector<double> v(d, 1.0 / static_cast<double>(d));
  v[0] = static_cast<double>(s) / static_cast<double>(d);
  for (std::uint64_t j = 1; j < s; ++j) v[j] = 0.0;
  return ProbabilityVector(std::move(v));
}

double threshold_eps1(const ProblemParams& params) {
  params.validate();
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  return std::sqrt(static_cast<double>(params.s) / (n * std::sqrt(d)));
}

double threshold_eps2(const ProblemParams& params) {
  params.validate();
  if (params.d < 2) throw DomainError("threshold_eps2 needs d >= 2 (log d > 0)");
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  return static_cast<double>(params.s) * std::sqrt(2.0 * std::log(d) / (n * d));
}

double c_alpha(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("c_alpha needs alpha in (1/2, 1)");
  if (alpha < 0.75) return alpha - 0.5;
  const double root = 1.0 - std::sqrt(1.0 - alpha);
  return root * root;
}

Regime classify_regime(const ProblemParams& params, const RegimeConstants& constants) {
  params.validate();
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  if (params.alpha <= 0.5) {
    const bool above = n >= constants.dense * std::pow(d, 0.5 + params.alpha);
    return {Density::Dense, above ? SampleSizeRegime::AboveThreshold : SampleSizeRegime::BelowThreshold};
  }
  const double ld = std::log(d);
  if (n >= constants.sparse_above * d * ld * ld * ld) return {Density::Sparse, SampleSizeRegime::AboveThreshold};
  if (n <= constants.sparse_below * d * ld) return {Density::Sparse, SampleSizeRegime::BelowThreshold};
  return {Density::Sparse, SampleSizeRegime::Indeterminate};
}

bool block_alternative_feasible(const ProblemParams& params) {
  const double shift = params.epsilon / static_cast<double>(params.s);
  return shift <= 1.0 / static_cast<double>(params.d) * (1.0 + 1e-12);
}

ProbabilityVector make_block_alternative(const ProblemParams& params) {
  params.validate();
  if (params.s % 2 != 0) throw DomainError("block alternative needs even s, got " + std::to_string(params.s));
  if (!block_alternative_feasible(params)) {
    throw InfeasibleError("block alternative infeasible: eps/s = " + std::to_string(params.epsilon / params.s) +
                          " exceeds 1/d = " + std::to_string(1.0 / params.d));
  }
  const double base = 1.0 / static_cast<double>(params.d);
  const double shift = params.epsilon / static_cast<double>(params.s);
  std::vector<double> v(params.d, base);
  const std::uint64_t half = params.s / 2;
  for (std::uint64_t j = 0; j < half; ++j) {
    v[j] = base + shift;
    v[half + j] = clamp_rounding(base - shift);
  }
  return ProbabilityVector(std::move(v));
}

double l1_distance_to_uniform(const ProbabilityVector& p) {
  const double base = 1.0 / static_cast<double>(p.size());
  std::vector<double> dev(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) dev[j] = std::abs(p[j] - base);
  return compensated_sum(dev);
}

std::size_t l0_distance_to_uniform(const ProbabilityVector& p, double tol) {
  const double base = 1.0 / static_cast<double>(p.size());
  std::size_t count = 0;
  for (double x : p.values()) count += std::abs(x - base) > tol ? 1 : 0;
  return count;
}

double l2_distance_sq_to_uniform(const ProbabilityVector& p) {
  const double base = 1.0 / static_cast<double>(p.size());
  std::vector<double> dev(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) dev[j] = (p[j] - base) * (p[j] - base);
  return compensated_sum(dev);
}

std::string to_string(Density density) { return density == Density::Dense ? "dense" : "sparse"; }

std::string to_string(SampleSizeRegime regime) {
  switch (regime) {
    case SampleSizeRegime::AboveThreshold: return "above_threshold";
    case SampleSizeRegime::BelowThreshold: return "below_threshold";
    case SampleSizeRegime::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

}  // namespace sparse_unif
