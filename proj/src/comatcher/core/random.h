#pragma once

#include <cstdint>
#include <random>

namespace comatcher {

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for (seed, stream). Streams derived this way do not
// depend on how many draws other streams made.
inline std::mt19937_64 MakeRng(uint64_t seed, uint64_t stream = 0) {
  return std::mt19937_64(SplitMix64(SplitMix64(seed) ^ SplitMix64(~stream)));
}

inline double UniformReal(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double StandardNormal(std::mt19937_64& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace comatcher
