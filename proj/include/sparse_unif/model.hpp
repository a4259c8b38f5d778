#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sparse_unif {

/// The universe of a testing problem: n samples over a domain of size d,
/// s-sparse alternatives at L1 distance epsilon from uniform.
struct ProblemParams {
  std::uint64_t n = 1;
  std::uint64_t d = 1;
  std::uint64_t s = 1;
  double alpha = 0.0;
  double epsilon = 0.0;

  /// s = round(d^{1-alpha}), floored at 1.
  static ProblemParams from_alpha(std::uint64_t n, std::uint64_t d, double alpha, double epsilon);

  /// Throws DomainError unless n, d >= 1, 1 <= s <= d, alpha in [0,1], epsilon >= 0.
  void validate() const;

  double null_mean() const { return static_cast<double>(n) / static_cast<double>(d); }
};

std::uint64_t sparsity_from_alpha(std::uint64_t d, double alpha);

/// A point of the probability simplex over [d].
class ProbabilityVector {
 public:
  /// Validates nonnegativity and unit mass (1e-12, compensated sum).
  explicit ProbabilityVector(std::vector<double> probs);

  static ProbabilityVector uniform(std::size_t d);
  static ProbabilityVector point_mass(std::size_t d, std::size_t j);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

enum class Density { Dense, Sparse };
enum class SampleSizeRegime { AboveThreshold, BelowThreshold, Indeterminate };

struct Regime {
  Density density;
  SampleSizeRegime sample_size;
};

/// Hidden constants of the sample-size comparators.
struct RegimeConstants {
  double dense = 1.0;         // n >= c1 d^{1/2+alpha}
  double sparse_above = 1.0;  // n >= c2 d ln^3 d
  double sparse_below = 1.0;  // n <= c3 d ln d
};

/// 2(s-1)/d, attained by one coordinate at s/d and s-1 coordinates at 0.
double epsilon_max(std::uint64_t d, std::uint64_t s);
/// The extremal vector attaining epsilon_max: (s/d, 0 x (s-1), 1/d ...).
ProbabilityVector extremal_vector(std::uint64_t d, std::uint64_t s);

double threshold_eps1(const ProblemParams& params);
double threshold_eps2(const ProblemParams& params);
double c_alpha(double alpha);

Regime classify_regime(const ProblemParams& params, const RegimeConstants& constants = {});

/// Block alternative: +eps/s on the first s/2 coordinates, -eps/s on the next s/2.
ProbabilityVector make_block_alternative(const ProblemParams& params);
/// True when the block alternative stays in the simplex (eps/s <= 1/d).
bool block_alternative_feasible(const ProblemParams& params);

double l1_distance_to_uniform(const ProbabilityVector& p);
std::size_t l0_distance_to_uniform(const ProbabilityVector& p, double tol = 1e-12);
double l2_distance_sq_to_uniform(const ProbabilityVector& p);

std::string to_string(Density density);
std::string to_string(SampleSizeRegime regime);

}  // namespace sparse_unif
