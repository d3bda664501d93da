#pragma once

#include <cstdint>
#include <random>

namespace cadapt {

/// Named sub-streams derived from one command seed.
enum class SeedStream : std::uint64_t {
  kData = 1,
  kFolds = 2,
  kInit = 3,
  kSample = 4,
};

/// SplitMix64 finalizer over (seed, stream); different streams of the same
/// seed are decorrelated.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, SeedStream stream) {
  return DeriveSeed(seed, static_cast<std::uint64_t>(stream));
}

/// Uniform integer in [0, bound) by rejection; unlike
/// std::uniform_int_distribution the sequence is the same on every standard
/// library.
inline std::uint64_t UniformIndex(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

}  // namespace cadapt
