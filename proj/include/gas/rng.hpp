#pragma once

#include <cstdint>

#include "gas/gaussian.hpp"

namespace gas {

/// Counter-based random stream. A stream is an immutable 64-bit key; draws are
/// pure functions of (key, counter) and sub-streams are derived by hashing a
/// caller-chosen sub-key into the key. Because no state mutates, a sample's
/// randomness depends only on how it is addressed -- (sample index, time step,
/// component) -- never on evaluation order, which makes serial and threaded
/// runs byte-identical.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(mix(golden_, seed)) {}

  /// Child stream for a structural sub-key (sample index, step, purpose tag).
  RandomStream derive(std::uint64_t sub_key) const {
    return RandomStream(key_, mix(key_, sub_key * golden_));
  }

  /// Raw 64 bits for the given counter. The counter steps by the golden-ratio
  /// increment before mixing: one finalizer pass over counters that differ
  /// only in their low bits leaves measurable correlations between nearby
  /// draws, while the spread-out inputs make this a keyed SplitMix64 sequence.
  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ ^ draw_tag_, counter * golden_);
  }

  /// Uniform draw on the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    // 53-bit mantissa, offset by half an ulp so 0 and 1 are unreachable.
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw via the inverse CDF (one uniform per normal).
  double normal(std::uint64_t counter) const { return normal_quantile(uniform(counter)); }

 private:
  RandomStream(std::uint64_t, std::uint64_t derived) : key_(derived) {}

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // hash_combine-style fold followed by a full finalizer pass.
    a ^= b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2);
    return splitmix(a);
  }

  static constexpr std::uint64_t golden_ = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t draw_tag_ = 0xD1B54A32D192ED03ULL;

  std::uint64_t key_;
};

/// Convenience wrapper when a consumer just wants consecutive draws from a
/// stream and does not care about the counter layout.
class SequentialDraws {
 public:
  explicit SequentialDraws(RandomStream stream) : stream_(stream) {}

  double uniform() { return stream_.uniform(next_++); }
  double normal() { return stream_.normal(next_++); }
  std::uint64_t bits() { return stream_.bits(next_++); }

  /// Uniform integer in [0, n) by rejection-free scaling (n << 2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  RandomStream stream_;
  std::uint64_t next_ = 0;
};

}  // namespace gas
