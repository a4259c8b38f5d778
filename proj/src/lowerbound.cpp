#include "sparse_unif/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "sparse_unif/error.hpp"
#include "sparse_unif/numerics.hpp"
#include "sparse_unif/parallel.hpp"
#include "sparse_unif/sampling.hpp"

namespace sparse_unif {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kInnerTag = 0x1AAE11ULL;
constexpr std::uint64_t kNullTag = 0x5EC0DULL;

void require_even(const ProblemParams& params, const char* what) {
  if (params.d % 2 != 0 || params.s % 2 != 0) {
    throw DomainError(std::string(what) + " needs even d and s (got d = " + std::to_string(params.d) +
                      ", s = " + std::to_string(params.s) + ")");
  }
}

// ln cosh(c) for c >= 0 without overflow.
double log_cosh(double c) { return c + std::log1p(std::exp(-2.0 * c)) - std::log(2.0); }

double paired_c(const ProblemParams& params) {
  const double s = static_cast<double>(params.s);
  return 2.0 * static_cast<double>(params.n) * static_cast<double>(params.d) * params.epsilon * params.epsilon /
         (s * s);
}

void require_paired_feasible(const ProblemParams& params) {
  if (!block_alternative_feasible(params)) {
    throw InfeasibleError("paired prior leaves the simplex: eps/s = " + std::to_string(params.epsilon / params.s) +
                          " exceeds 1/d = " + std::to_string(1.0 / params.d));
  }
}

// Pairwise summation keeps the aggregate independent of how the values were produced.
double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

std::vector<double> pair_factors(const ProblemParams& params, std::span<const std::uint64_t> counts) {
  const double theta = static_cast<double>(params.d) * params.epsilon / static_cast<double>(params.s);
  const std::size_t pairs = params.d / 2;
  std::vector<double> a(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double za = static_cast<double>(counts[2 * i]);
    const double zb = static_cast<double>(counts[2 * i + 1]);
    a[i] = 0.5 * (std::pow(1.0 + theta, za) * std::pow(1.0 - theta, zb) +
                  std::pow(1.0 - theta, za) * std::pow(1.0 + theta, zb));
  }
  return a;
}

}  // namespace

double risk_lower_bound_from_second_moment(double second_moment) {
  if (!(second_moment >= 1.0)) {
    throw DomainError("second moment " + std::to_string(second_moment) + " is below 1");
  }
  if (std::isinf(second_moment)) return 0.0;
  return std::max(0.0, 1.0 - 0.5 * std::sqrt(second_moment - 1.0));
}

PriorSpec PriorSpec::resolved() const {
  PriorSpec out = *this;
  params.validate();
  switch (kind) {
    case PriorKind::PairedDense:
      require_even(params, "paired prior");
      break;
    case PriorKind::SparseTwoSided:
      if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
      break;
    case PriorKind::Impossibility: {
      if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
      if (out.gamma_d == 0.0) out.gamma_d = default_gamma_d(params);
      if (out.r_n == 0.0) out.r_n = default_r_n(params);
      const double d = static_cast<double>(params.d);
      const double r_cap = std::min(1.0 / d, 1.0 / std::sqrt(static_cast<double>(params.n) * d));
      if (!(out.gamma_d >= 1.0)) throw DomainError("gamma_d must be at least 1");
      if (!(out.r_n > 0.0 && out.r_n < r_cap)) throw DomainError("r_n must lie in (0, min(1/d, 1/sqrt(nd)))");
      break;
    }
  }
  return out;
}

// ---- paired dense prior --------------------------------------------------------

ProbabilityVector sample_paired_dense_prior(const ProblemParams& params, const SeedSpec& seed) {
  params.validate();
  require_even(params, "paired prior");
  require_paired_feasible(params);
  const double d = static_cast<double>(params.d);
  const double shift = params.epsilon / static_cast<double>(params.s);
  std::vector<double> p(params.d, 1.0 / d);
  Philox4x64 rng(seed);
  for (std::uint64_t pair : sample_subset(params.d / 2, params.s / 2, rng)) {
    const double sign = (rng() >> 63) ? 1.0 : -1.0;
    p[2 * pair] = 1.0 / d + sign * shift;
    p[2 * pair + 1] = 1.0 / d - sign * shift;
  }
  return ProbabilityVector(std::move(p));
}

SecondMomentReport paired_second_moment_exact(const ProblemParams& params) {
  params.validate();
  require_even(params, "paired prior");
  const auto pop = static_cast<std::int64_t>(params.d / 2);
  const auto k_max = static_cast<std::int64_t>(params.s / 2);
  const double c = paired_c(params);
  const double lc = log_cosh(c);

  SecondMomentReport rep;
  rep.is_exact = true;
  // value - 1 is accumulated directly so that tiny excesses keep full precision.
  if (static_cast<double>(k_max) * lc < 700.0) {
    double excess = 0.0;
    for (std::int64_t k = 0; k <= k_max; ++k) {
      const LogProb pk = hypergeometric_pmf(k, pop, k_max, k_max);
      if (!pk.is_zero()) excess += pk.prob() * std::expm1(static_cast<double>(k) * lc);
    }
    rep.value = 1.0 + excess;
  } else {
    std::vector<double> terms;
    for (std::int64_t k = 0; k <= k_max; ++k) {
      const LogProb pk = hypergeometric_pmf(k, pop, k_max, k_max);
      if (!pk.is_zero()) terms.push_back(pk.log() + static_cast<double>(k) * lc);
    }
    const double log_value = log_sum_exp(terms);
    rep.value = log_value > std::log(1e300) ? kInf : std::exp(log_value);
  }
  const double q = static_cast<double>(params.s) / static_cast<double>(params.d);
  const double log_base = q >= 1.0 ? lc : log_add_exp(std::log1p(-q), std::log(q) + lc);
  const double log_bound = static_cast<double>(k_max) * log_base;
  rep.binomial_bound = log_bound > std::log(1e300) ? kInf : std::exp(log_bound);
  rep.risk_lower_bound = risk_lower_bound_from_second_moment(rep.value);
  return rep;
}

std::uint64_t paired_prior_atoms(const ProblemParams& params) {
  const std::int64_t pairs = static_cast<std::int64_t>(params.d / 2);
  const std::int64_t k = static_cast<std::int64_t>(params.s / 2);
  const double log_atoms = log_choose(pairs, k) + static_cast<double>(k) * std::log(2.0);
  if (log_atoms >= 63.0 * std::log(2.0)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::llround(std::exp(log_atoms)));
}

double paired_likelihood_ratio(const ProblemParams& params, std::span<const std::uint64_t> counts) {
  if (counts.size() != params.d) throw DomainError("histogram size differs from d");
  const std::vector<double> a = pair_factors(params, counts);
  const std::size_t m = a.size();
  const std::size_t k = params.s / 2;
  // Signs are averaged in closed form inside a_i; subsets are enumerated in
  // lexicographic order with a running prefix product.
  std::vector<std::size_t> idx(k);
  std::vector<double> prefix(k + 1, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    idx[i] = i;
    prefix[i + 1] = prefix[i] * a[i];
  }
  double sum = 0.0;
  double count = 0.0;
  for (;;) {
    sum += prefix[k];
    count += 1.0;
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == m - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
    for (std::size_t i = pos - 1; i < k; ++i) prefix[i + 1] = prefix[i] * a[idx[i]];
  }
  return sum / count;
}

SecondMomentReport paired_second_moment_mc(const ProblemParams& params, std::uint64_t replications,
                                           const SeedSpec& seed, const PairedMcOptions& options) {
  params.validate();
  require_even(params, "paired prior");
  require_paired_feasible(params);
  if (replications < 2) throw DomainError("second-moment Monte Carlo needs B >= 2");
  const bool exact_inner = paired_prior_atoms(params) <= options.max_atoms;
  if (!exact_inner && options.inner_samples == 0) {
    throw ConfigError("paired prior has more than " + std::to_string(options.max_atoms) +
                      " atoms; set inner_samples to estimate the likelihood ratio by sampling");
  }
  std::vector<double> l_sq(replications);
  parallel_for(replications, options.threads, [&](std::size_t b) {
    const Histogram z = sample_null(params.d, params.n, SamplingScheme::Poissonized, seed.child(b, kNullTag));
    double l = 0.0;
    if (exact_inner) {
      l = paired_likelihood_ratio(params, z.counts());
    } else {
      const std::vector<double> a = pair_factors(params, z.counts());
      Philox4x64 rng(seed.child(b, kInnerTag));
      std::vector<double> draws(options.inner_samples);
      for (auto& v : draws) {
        v = 1.0;
        for (std::uint64_t i : sample_subset(a.size(), params.s / 2, rng)) v *= a[i];
      }
      l = pairwise_sum(draws) / static_cast<double>(draws.size());
    }
    l_sq[b] = l * l;
  });
  const double bn = static_cast<double>(replications);
  const double mean = pairwise_sum(l_sq) / bn;
  std::vector<double> dev(replications);
  for (std::size_t b = 0; b < replications; ++b) dev[b] = (l_sq[b] - mean) * (l_sq[b] - mean);
  const double var = pairwise_sum(dev) / (bn - 1.0);

  SecondMomentReport rep;
  rep.value = mean;
  rep.is_exact = false;
  rep.se = std::sqrt(var / bn);
  // A Monte-Carlo mean may dip below 1 by noise; the bound uses the clamped value.
  rep.risk_lower_bound = risk_lower_bound_from_second_moment(std::max(mean, 1.0));
  return rep;
}

// ---- sparse two-sided prior ------------------------------------------------------

double sparse_twosided_eta(const ProblemParams& params, double delta) {
  params.validate();
  if (!(params.alpha > 0.5)) throw DomainError("sparse two-sided prior needs alpha > 1/2");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  const double d = static_cast<double>(params.d);
  return std::sqrt(2.0 * c_alpha(params.alpha) * (1.0 - delta) * std::log(d) / (static_cast<double>(params.n) * d));
}

ProbabilityVector sample_sparse_twosided_prior(const ProblemParams& params, double delta, const SeedSpec& seed) {
  const double eta = sparse_twosided_eta(params, delta);
  if (params.s % 2 != 0) throw DomainError("sparse two-sided prior needs even s");
  const double d = static_cast<double>(params.d);
  if (eta > 1.0 / d) {
    throw InfeasibleError("sparse two-sided prior leaves the simplex: eta = " + std::to_string(eta) +
                          " > 1/d at alpha = " + std::to_string(params.alpha) + ", n = " + std::to_string(params.n) +
                          ", d = " + std::to_string(params.d));
  }
  const std::uint64_t first = (params.d + 1) / 2;
  const std::uint64_t second = params.d - first;
  const std::uint64_t half_s = params.s / 2;
  if (half_s > second) throw DomainError("s/2 exceeds the second half of the domain");
  Philox4x64 rng(seed);
  std::vector<double> p(params.d, 1.0 / d);
  for (std::uint64_t j : sample_subset(first, half_s, rng)) p[j] = 1.0 / d + eta;
  for (std::uint64_t j : sample_subset(second, half_s, rng)) p[first + j] = 1.0 / d - eta;
  return ProbabilityVector(std::move(p));
}

// ---- impossibility prior -----------------------------------------------------------

double default_gamma_d(const ProblemParams& params) {
  const double g = std::sqrt(std::sqrt(static_cast<double>(params.s)) / std::log(static_cast<double>(params.d)));
  return std::max(1.0, g);
}

double default_r_n(const ProblemParams& params) {
  const double d = static_cast<double>(params.d);
  return 0.5 * std::min(1.0 / d, 1.0 / std::sqrt(static_cast<double>(params.n) * d));
}

ImpossibilityDraw sample_impossibility_prior(const ProblemParams& params, double delta, double gamma_d, double r_n,
                                             const SeedSpec& seed) {
  const PriorSpec spec = PriorSpec{PriorKind::Impossibility, params, delta, gamma_d, r_n}.resolved();
  if (params.s < 2) throw DomainError("impossibility prior needs s >= 2");
  const double d = static_cast<double>(params.d);
  const double s = static_cast<double>(params.s);
  const auto lowered_count = static_cast<std::uint64_t>(std::floor(delta * s));
  const std::uint64_t support = params.s - lowered_count;
  const std::uint64_t first = (params.d + 1) / 2;
  const std::uint64_t second = params.d - first;
  if (support > first || lowered_count > second || second < 2) {
    throw DomainError("impossibility prior does not fit in d = " + std::to_string(params.d));
  }

  Philox4x64 rng(seed);
  const std::vector<std::uint64_t> s_set = sample_subset(first, support, rng);
  std::bernoulli_distribution coin(delta);
  const double raised = (1.0 + (1.0 - delta) * (1.0 - delta) / delta) / d;
  const double lowered = delta / d;
  std::vector<double> p(params.d, 1.0 / d);
  double coins = 0.0;
  double first_half_l1 = 0.0;
  for (std::uint64_t j : s_set) {
    const bool up = coin(rng);
    p[j] = up ? raised : lowered;
    coins += up ? 1.0 : 0.0;
    first_half_l1 += std::abs(p[j] - 1.0 / d);
  }
  const double delta_mass = (1.0 - delta) / d * (coins / delta - static_cast<double>(support));
  const double t = delta * s;
  const bool good = lowered_count > 0 && std::abs(delta_mass) <= spec.gamma_d * s / (d * std::sqrt(t));

  if (good) {
    const double shift = delta_mass / static_cast<double>(lowered_count);
    for (std::uint64_t j : sample_subset(second, lowered_count, rng)) {
      const double v = 1.0 / d - shift;
      if (v < 0.0) {
        throw InfeasibleError("impossibility prior produced a negative coordinate; delta = " +
                              std::to_string(delta) + " is infeasible here");
      }
      p[first + j] = v;
    }
  } else {
    std::fill(p.begin(), p.end(), 1.0 / d);
    p[first] = 1.0 / d + spec.r_n;
    p[first + 1] = 1.0 / d - spec.r_n;
  }
  return {ProbabilityVector(std::move(p)), good, first_half_l1, delta_mass};
}

double expected_l1_of_impossibility_prior(const ProblemParams& params, double delta) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  const double d = static_cast<double>(params.d);
  const double s = static_cast<double>(params.s);
  const double value = 2.0 * (1.0 - delta) / d * (s - std::floor(delta * s)) * (1.0 - delta);
  if (value < 2.0 * std::pow(1.0 - delta, 3) * s / d * (1.0 - 1e-12)) {
    throw DomainError("expected L1 fell below its lower bound");
  }
  return value;
}

// ---- F_r -----------------------------------------------------------------------

FrThreshold f_r_threshold(const ProblemParams& params) {
  params.validate();
  if (params.d < 2) throw DomainError("f_r_threshold needs d >= 2");
  if (!(params.alpha > 0.5)) throw DomainError("f_r_threshold needs alpha > 1/2");
  const double c_star = params.epsilon / threshold_eps2(params);
  const double r = std::min(1.0, 4.0 * c_star);
  return {r, std::sqrt(2.0 * r * std::log(static_cast<double>(params.d))), c_star};
}

double f_r(double y, double r, std::uint64_t d) {
  const double t = std::sqrt(2.0 * r * std::log(static_cast<double>(d)));
  return normal_upper_tail(t - y).prob() + normal_upper_tail(t + y).prob();
}

VariationalCheck variational_check(const ProblemParams& params, double c_star, std::uint64_t grid_size,
                                   double tolerance) {
  params.validate();
  if (params.d < 2) throw DomainError("variational check needs d >= 2");
  if (grid_size < 1000) throw DomainError("variational check needs grid_size >= 1000");
  if (!(c_star > 0.0)) throw DomainError("C* must be positive");
  if (c_star > 1.0) throw DomainError("constraint infeasible: C* > 1 puts s sqrt(2 C* ln d) above s sqrt(2 ln d)");
  const double ln_d = std::log(static_cast<double>(params.d));
  const double r = std::min(1.0, 4.0 * c_star);
  const double t_r = std::sqrt(2.0 * r * ln_d);
  const double y_hat = std::sqrt(2.0 * c_star * ln_d);
  const double y_max = std::sqrt(2.0 * ln_d);
  const double lambda = normal_pdf(t_r - y_hat) - normal_pdf(t_r + y_hat);
  auto g = [&](double y) { return f_r(y, r, params.d) - lambda * y; };

  const double step = y_max / static_cast<double>(grid_size);
  double best_y = step;
  double best = g(step);
  for (std::uint64_t i = 2; i <= grid_size; ++i) {
    const double y = step * static_cast<double>(i);
    const double v = g(y);
    if (v < best) {
      best = v;
      best_y = y;
    }
  }
  // Golden-section refinement inside the bracketing grid cells.
  double lo = std::max(step * 1e-9, best_y - step);
  double hi = std::min(y_max, best_y + step);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * y_max; ++it) {
    if (g1 < g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - phi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + phi * (hi - lo);
      g2 = g(x2);
    }
  }
  for (double y : {x1, x2}) {
    const double v = g(y);
    if (v < best) {
      best = v;
      best_y = y;
    }
  }

  const double s = static_cast<double>(params.s);
  VariationalCheck out{};
  out.y_hat = y_hat;
  out.lambda_hat = lambda;
  out.y_argmin = best_y;
  out.lagrangian_bound = s * (best + lambda * y_hat);
  out.target = s * f_r(y_hat, r, params.d);
  out.relative_gap = std::abs(out.lagrangian_bound - out.target) / out.target;
  out.passed = out.relative_gap <= tolerance;
  return out;
}

bool check_variational_identity(const ProblemParams& params, double c_star, std::uint64_t grid_size) {
  return variational_check(params, c_star, grid_size).passed;
}

}  // namespace sparse_unif
