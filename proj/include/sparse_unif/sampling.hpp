#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparse_unif/model.hpp"
#include "sparse_unif/rng.hpp"

namespace sparse_unif {

enum class SamplingScheme { Multinomial, Poissonized };

std::string to_string(SamplingScheme scheme);
SamplingScheme parse_scheme(const std::string& name);

/// Observed category counts Z = (Z_1, ..., Z_d).
class Histogram {
 public:
  Histogram(std::vector<std::uint64_t> counts, std::uint64_t n, SamplingScheme scheme);

  std::size_t size() const { return counts_.size(); }
  std::uint64_t operator[](std::size_t j) const { return counts_[j]; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  /// Nominal sample size (the Poisson mean of the total under Poissonization).
  std::uint64_t n() const { return n_; }
  SamplingScheme scheme() const { return scheme_; }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t n_ = 0;
  SamplingScheme scheme_ = SamplingScheme::Multinomial;
};

/// Multinomial(n; p) via sequential conditional binomials.
Histogram sample_multinomial(const ProbabilityVector& p, std::uint64_t n, const SeedSpec& seed);
/// Independent Z_j ~ Pois(n p_j).
Histogram sample_poissonized(const ProbabilityVector& p, std::uint64_t n, const SeedSpec& seed);
Histogram sample_histogram(const ProbabilityVector& p, std::uint64_t n, SamplingScheme scheme,
                           const SeedSpec& seed);

/// Uniform null counts without materialising the uniform vector.
Histogram sample_null(std::uint64_t d, std::uint64_t n, SamplingScheme scheme, const SeedSpec& seed);

/// Uniformly random k-subset of {0, ..., m-1}, sorted ascending.
std::vector<std::uint64_t> sample_subset(std::uint64_t m, std::uint64_t k, Philox4x64& rng);

}  // namespace sparse_unif
