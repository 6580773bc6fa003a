#pragma once

// Draws built directly on mt19937_64 output. The standard distributions are
// implementation-defined, so seeded results would differ across libraries.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace colrec::detail {

inline std::mt19937_64 make_engine(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq s(words.begin(), words.end());
  return std::mt19937_64(s);
}

/// Unbiased integer in [0, n); n must be positive.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

}  // namespace colrec::detail
