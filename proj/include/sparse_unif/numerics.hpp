#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace sparse_unif {

/// Natural logarithm of a probability. -inf encodes an exact zero.
class LogProb {
 public:
  constexpr LogProb() = default;
  constexpr explicit LogProb(double log_value) : value_(log_value) {}

  static constexpr LogProb zero() { return LogProb(-std::numeric_limits<double>::infinity()); }
  static constexpr LogProb one() { return LogProb(0.0); }

  constexpr double log() const { return value_; }
  double prob() const;
  bool is_zero() const { return value_ == -std::numeric_limits<double>::infinity(); }

 private:
  double value_ = -std::numeric_limits<double>::infinity();
};

/// ln(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);
/// ln(sum exp(x_i)); -inf for an empty span.
double log_sum_exp(std::span<const double> xs);
/// ln(1 - exp(x)) for x <= 0.
double log1m_exp(double x);

LogProb poisson_pmf(std::int64_t k, double lambda);
/// ln P(Pois(lambda) <= k). k < 0 is the empty event.
LogProb poisson_cdf(std::int64_t k, double lambda);
/// ln P(Pois(lambda) >= k). k <= 0 is the whole space.
LogProb poisson_sf(std::int64_t k, double lambda);

/// ln P(|Pois(lambda) - lambda| / sqrt(lambda) >= t).
///
/// Both boundary inequalities are non-strict: a count sitting exactly on
/// lambda +- t sqrt(lambda) is part of the event.
LogProb abs_deviation_tail(double t, double lambda);

/// Integer count thresholds of the event {|D| >= t}: counts z with
/// z >= upper or z <= lower. lower is -1 when the lower branch is empty.
struct DeviationCutoffs {
  std::int64_t upper;
  std::int64_t lower;
};
DeviationCutoffs deviation_cutoffs(double t, double lambda);

/// ln of the standard normal upper tail 1 - Phi(x).
LogProb normal_upper_tail(double x);
double normal_pdf(double x);

/// ln P(K = k) for K ~ Hypergeometric(pop, succ, draws).
LogProb hypergeometric_pmf(std::int64_t k, std::int64_t pop, std::int64_t succ, std::int64_t draws);

/// ln n!
double log_factorial(std::int64_t n);
/// ln C(n, k); -inf outside 0 <= k <= n.
double log_choose(std::int64_t n, std::int64_t k);

}  // namespace sparse_unif
