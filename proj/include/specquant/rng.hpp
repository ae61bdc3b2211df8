#pragma once

#include <cstdint>

namespace specquant::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream key derived only from its coordinates, so draws never depend on the
/// order (or thread) in which they are requested.
constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t i,
                            std::uint64_t j = 0) noexcept {
  return mix64(mix64(mix64(mix64(seed) ^ stream) ^ i) ^ j);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

enum Stream : std::uint64_t {
  kPresence = 0x70726573,
  kConcentration = 0x636f6e63,
  kNoise = 0x6e6f6973,
  kLibrary = 0x6c696272,
  kFolds = 0x666f6c64,
};

}  // namespace specquant::rng
