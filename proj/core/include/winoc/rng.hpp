#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace winoc {

using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent streams from one root.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the subsystem named `label`. Every random stream in the project
/// is derived from the root seed this way, so adding a consumer never shifts
/// the numbers another consumer sees.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept {
  return mix64(root ^ mix64(fnv1a(label)));
}

inline Rng make_rng(std::uint64_t root, std::string_view label) {
  return Rng(derive_seed(root, label));
}

// The standard distributions are implementation-defined; these are not, so
// traces stay identical across standard libraries.

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Fisher-Yates with uniform_index.
template <class It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace winoc
