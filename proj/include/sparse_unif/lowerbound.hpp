#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "sparse_unif/model.hpp"
#include "sparse_unif/rng.hpp"

namespace sparse_unif {

enum class PriorKind { PairedDense, SparseTwoSided, Impossibility };

struct PriorSpec {
  PriorKind kind = PriorKind::PairedDense;
  ProblemParams params;
  double delta = 0.1;
  double gamma_d = 0.0;  // Impossibility only; 0 means default_gamma_d
  double r_n = 0.0;      // Impossibility only; 0 means default_r_n

  /// Fills defaulted gamma_d / r_n and throws DomainError on violated invariants.
  PriorSpec resolved() const;
};

struct SecondMomentReport {
  double value = 1.0;  // E_H0[L^2], +inf when above 1e300
  bool is_exact = true;
  double risk_lower_bound = 1.0;
  std::optional<double> se;
  std::optional<double> binomial_bound;
};

/// max(0, 1 - sqrt(m - 1) / 2); m < 1 is a DomainError.
double risk_lower_bound_from_second_moment(double second_moment);

// ---- paired dense prior --------------------------------------------------------

/// s/2 of the d/2 consecutive pairs (2i, 2i+1) get +-eps/s with a random sign.
ProbabilityVector sample_paired_dense_prior(const ProblemParams& params, const SeedSpec& seed);

/// E[cosh(c)^K], c = 2 n d eps^2 / s^2, K ~ Hypergeometric(d/2, s/2, s/2).
SecondMomentReport paired_second_moment_exact(const ProblemParams& params);

struct PairedMcOptions {
  std::uint64_t max_atoms = std::uint64_t{1} << 16;
  /// Prior draws per histogram once the atom count exceeds max_atoms; 0 makes that a ConfigError.
  std::uint64_t inner_samples = 0;
  unsigned threads = 1;
};

/// Number of (pair subset, sign) atoms of the paired prior, saturating at UINT64_MAX.
std::uint64_t paired_prior_atoms(const ProblemParams& params);

/// Likelihood ratio of the paired prior at a Poissonized histogram, by exact enumeration.
double paired_likelihood_ratio(const ProblemParams& params, std::span<const std::uint64_t> counts);

/// Monte-Carlo E_H0[L^2] over B Poissonized null histograms.
SecondMomentReport paired_second_moment_mc(const ProblemParams& params, std::uint64_t replications,
                                           const SeedSpec& seed, const PairedMcOptions& options = {});

// ---- sparse two-sided prior ------------------------------------------------------

/// eta = sqrt(2 C(alpha) (1 - delta) ln d / (n d)).
double sparse_twosided_eta(const ProblemParams& params, double delta);

/// +eta on s/2 indices of the first ceil(d/2), -eta on s/2 of the rest.
ProbabilityVector sample_sparse_twosided_prior(const ProblemParams& params, double delta, const SeedSpec& seed);

// ---- impossibility prior -----------------------------------------------------------

/// (sqrt(s) / ln d)^{1/2}, clamped to at least 1.
double default_gamma_d(const ProblemParams& params);
/// min(1/d, 1/sqrt(n d)) / 2.
double default_r_n(const ProblemParams& params);

struct ImpossibilityDraw {
  ProbabilityVector vector;
  bool on_good_event;
  /// L1 mass of the eta-driven first-half perturbation, whichever branch was taken.
  double first_half_l1;
  /// Signed first-half excess mass Delta(eta).
  double delta_mass;
};

ImpossibilityDraw sample_impossibility_prior(const ProblemParams& params, double delta, double gamma_d, double r_n,
                                             const SeedSpec& seed);

/// (2 (1 - delta) / d) (s - floor(delta s)) (1 - delta).
double expected_l1_of_impossibility_prior(const ProblemParams& params, double delta);

// ---- F_r -----------------------------------------------------------------------

struct FrThreshold {
  double r;
  double t_r;
  double c_star;
};

/// C* = eps / eps2, r = min(1, 4 C*), t_r = sqrt(2 r ln d).
FrThreshold f_r_threshold(const ProblemParams& params);

/// PhiBar(t_r - y) + PhiBar(t_r + y) with t_r = sqrt(2 r ln d).
double f_r(double y, double r, std::uint64_t d);

struct VariationalCheck {
  bool passed;
  double y_hat;
  double lambda_hat;
  double y_argmin;
  double lagrangian_bound;  // s (min_y G(y) + lambda_hat y_hat)
  double target;            // s F_r(y_hat)
  double relative_gap;
};

/// Grid minimisation of G(y) = F_r(y) - lambda_hat y over (0, sqrt(2 ln d)] and
/// comparison of the Lagrangian bound with s F_r(y_hat), y_hat = sqrt(2 C* ln d).
VariationalCheck variational_check(const ProblemParams& params, double c_star, std::uint64_t grid_size,
                                   double tolerance = 1e-6);
bool check_variational_identity(const ProblemParams& params, double c_star, std::uint64_t grid_size);

}  // namespace sparse_unif
