#include "sparse_unif/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>

#include "sparse_unif/error.hpp"

namespace sparse_unif {

std::string to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::Multinomial ? "multinomial" : "poissonized";
}

SamplingScheme parse_scheme(const std::string& name) {
  if (name == "multinomial") return SamplingScheme::Multinomial;
  if (name == "poissonized") return SamplingScheme::Poissonized;
  throw ConfigError("unknown sampling scheme '" + name + "' (expected multinomial|poissonized)");
}

Histogram::Histogram(std::vector<std::uint64_t> counts, std::uint64_t n, SamplingScheme scheme)
    : counts_(std::move(counts)), n_(n), scheme_(scheme) {
  if (counts_.empty()) throw DomainError("histogram must have at least one category");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  if (scheme_ == SamplingScheme::Multinomial && total_ != n_) {
    throw DomainError("multinomial histogram total " + std::to_string(total_) + " differs from n = " +
                      std::to_string(n_));
  }
}

namespace {

std::vector<std::uint64_t> multinomial_counts(std::span<const double> p, std::uint64_t n, Philox4x64& rng) {
  const std::size_t d = p.size();
  // Suffix masses are summed from the tail so that the last conditional
  // probability is exactly 1 up to rounding.
  std::vector<double> suffix(d + 1, 0.0);
  for (std::size_t j = d; j-- > 0;) suffix[j] = suffix[j + 1] + p[j];
  std::vector<std::uint64_t> counts(d, 0);
  std::uint64_t remaining = n;
  for (std::size_t j = 0; j < d && remaining > 0; ++j) {
    if (p[j] <= 0.0) continue;
    if (j + 1 == d || suffix[j + 1] <= 0.0) {
      counts[j] = remaining;
      remaining = 0;
      break;
    }
    const double q = std::clamp(p[j] / suffix[j], 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> binom(remaining, q);
    counts[j] = binom(rng);
    remaining -= counts[j];
  }
  return counts;
}

std::vector<std::uint64_t> poisson_counts(std::span<const double> p, std::uint64_t n, Philox4x64& rng) {
  std::vector<std::uint64_t> counts(p.size(), 0);
  const double scale = static_cast<double>(n);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double mean = scale * p[j];
    if (mean <= 0.0) continue;
    std::poisson_distribution<std::uint64_t> pois(mean);
    counts[j] = pois(rng);
  }
  return counts;
}

}  // namespace

Histogram sample_multinomial(const ProbabilityVector& p, std::uint64_t n, const SeedSpec& seed) {
  Philox4x64 rng(seed);
  return Histogram(multinomial_counts(p.values(), n, rng), n, SamplingScheme::Multinomial);
}

Histogram sample_poissonized(const ProbabilityVector& p, std::uint64_t n, const SeedSpec& seed) {
  Philox4x64 rng(seed);
  return Histogram(poisson_counts(p.values(), n, rng), n, SamplingScheme::Poissonized);
}

Histogram sample_histogram(const ProbabilityVector& p, std::uint64_t n, SamplingScheme scheme,
                           const SeedSpec& seed) {
  return scheme == SamplingScheme::Multinomial ? sample_multinomial(p, n, seed) : sample_poissonized(p, n, seed);
}

Histogram sample_null(std::uint64_t d, std::uint64_t n, SamplingScheme scheme, const SeedSpec& seed) {
  if (d == 0) throw DomainError("d must be positive");
  Philox4x64 rng(seed);
  if (scheme == SamplingScheme::Poissonized) {
    std::vector<std::uint64_t> counts(d);
    std::poisson_distribution<std::uint64_t> pois(static_cast<double>(n) / static_cast<double>(d));
    for (auto& c : counts) c = pois(rng);
    return Histogram(std::move(counts), n, scheme);
  }
  std::vector<std::uint64_t> counts(d, 0);
  std::uint64_t remaining = n;
  for (std::uint64_t j = 0; j + 1 < d && remaining > 0; ++j) {
    std::binomial_distribution<std::uint64_t> binom(remaining, 1.0 / static_cast<double>(d - j));
    counts[j] = binom(rng);
    remaining -= counts[j];
  }
  counts[d - 1] += remaining;
  return Histogram(std::move(counts), n, scheme);
}

std::vector<std::uint64_t> sample_subset(std::uint64_t m, std::uint64_t k, Philox4x64& rng) {
  if (k > m) throw DomainError("cannot draw a subset larger than its universe");
  std::vector<std::uint64_t> out;
  out.reserve(k);
  if (2 * k > m) {
    // Selection sampling (Knuth algorithm S): dense subsets in one pass.
    std::uint64_t needed = k;
    for (std::uint64_t i = 0; i < m && needed > 0; ++i) {
      if (rng.uniform() * static_cast<double>(m - i) < static_cast<double>(needed)) {
        out.push_back(i);
        --needed;
      }
    }
    return out;
  }
  // Floyd's algorithm for sparse subsets.
  std::unordered_set<std::uint64_t> chosen;
  for (std::uint64_t j = m - k; j < m; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(0, j);
    const std::uint64_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sparse_unif
