#pragma once

#include <cstdint>

namespace rpcrf {

/// SplitMix64 (Steele, Lea & Flood). Portable and fully specified, so equal
/// seeds give equal streams on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for item `index` of sub-stream `stream` under `seed`:
  /// seeded with mix(mix(seed) ^ mix(stream << 40 ^ index)).
  static SplitMix64 for_item(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) {
    return SplitMix64(mix(mix(seed) ^ mix((stream << 40) ^ index)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace rpcrf
