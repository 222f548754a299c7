#pragma once

#include <cstddef>
#include <random>

namespace fofelink::detail {

// Draws built from raw engine bits so seeded runs match across standard
// libraries (the std distributions are implementation-defined).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

template <typename It>
void shuffle(It first, It last, std::mt19937_64& rng) {
  for (auto n = static_cast<std::size_t>(last - first); n > 1; --n) {
    std::swap(first[n - 1], first[uniform_below(rng, n)]);
  }
}

}  // namespace fofelink::detail
