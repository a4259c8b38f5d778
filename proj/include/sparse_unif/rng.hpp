#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sparse_unif {

/// Stateless 64-bit mixer (splitmix64 finaliser).
std::uint64_t splitmix64(std::uint64_t x);

/// Identifies one random stream: (root_seed, stream_id). Distinct pairs give
/// disjoint Philox counter spaces; the same pair replays the same sequence.
struct SeedSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream for replication/sub-task `index` of this stream. `tag`
  /// separates unrelated families of children (e.g. calibration vs cells).
  SeedSpec child(std::uint64_t index, std::uint64_t tag = 0) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Philox4x64-10 counter-based generator (Salmon et al. 2011), usable as a
/// UniformRandomBitGenerator. The key is (root_seed, stream_id); the 256-bit
/// counter advances the block index in its low word.
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  explicit Philox4x64(const SeedSpec& seed) : key_{seed.root_seed, seed.stream_id} {}
  Philox4x64(const Key& key, const Block& counter) : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      increment();
      buffer_ = bijection(counter_, key_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// The raw 10-round Philox bijection.
  static Block bijection(Block counter, Key key);

 private:
  void increment() {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
  }

  Key key_{};
  Block counter_{};
  Block buffer_{};
  int pos_ = 4;
};

}  // namespace sparse_unif
