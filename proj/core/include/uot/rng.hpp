#pragma once

#include <cstdint>

namespace uot {

// SplitMix64. Pinned bit-for-bit: generated problems must be reproducible
// across toolchains and languages, so no <random> engine is used here.
struct SplitMix64 {
  std::uint64_t state;

  explicit constexpr SplitMix64(std::uint64_t seed) : state(seed) {}

  constexpr std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]: top 53 bits, shifted into [1, 2^53], scaled. Exact in
  // double, never zero, so generated problems are always strictly positive.
  constexpr double next_unit() { return double((next() >> 11) + 1) * 0x1p-53; }
};

}  // namespace uot
