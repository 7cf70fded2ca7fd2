#pragma once

#include <cstdint>
#include <random>

namespace rmab {

/// Engine used for every random stream in the simulator.  mt19937_64 is fully
/// specified by the standard, so sequences match across toolchains.
using RandomStream = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// k-th output of a SplitMix64 generator whose state starts at `base`:
///   derive_seed(base, k) = mix64(base + (k + 1) * 0x9E3779B97F4A7C15).
/// Used both for master seed -> run seeds and run seed -> substreams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) noexcept {
  return mix64(base + (k + 1) * kGoldenGamma);
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(RandomStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rmab
