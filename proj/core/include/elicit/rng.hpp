#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace elicit {

/// SplitMix64 finalizer. Good avalanche, cheap, and stable across platforms;
/// the basis of all seed derivation in this library.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of
/// distinguishing parts (indices, tags, hashed names). Changing any part
/// yields an unrelated stream, so separate concerns never share randomness.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

/// FNV-1a, for folding identifiers (strategy names, drug ids) into seeds.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Bit pattern of a double, for seeding streams keyed on grid values.
inline std::uint64_t seed_bits(double d) noexcept { return std::bit_cast<std::uint64_t>(d); }

/// Seeded random stream with explicitly coded transforms. std::mt19937_64
/// output is pinned by the standard; the uniform and normal transforms here
/// avoid the implementation-defined std distributions so that identical seeds
/// give identical draws on any platform.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Consumes exactly two engine draws per
  /// call, so stream positions stay aligned across call patterns.
  double normal() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;         // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound; // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  /// Fisher-Yates permutation of {0, ..., n-1}. The first k entries equal
  /// the result of a k-element partial shuffle with the same stream, so a
  /// prefix of a permutation is a without-replacement sample.
  std::vector<std::ptrdiff_t> permutation(std::ptrdiff_t n) {
    std::vector<std::ptrdiff_t> idx(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (std::ptrdiff_t i = 0; i < n - 1; ++i) {
      const std::ptrdiff_t j =
          i + static_cast<std::ptrdiff_t>(
                  uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
  }

  /// k distinct values from {0, ..., n-1}, in draw order.
  std::vector<std::ptrdiff_t> sample_without_replacement(std::ptrdiff_t n,
                                                         std::ptrdiff_t k) {
    std::vector<std::ptrdiff_t> idx(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (std::ptrdiff_t i = 0; i < k && i < n - 1; ++i) {
      const std::ptrdiff_t j =
          i + static_cast<std::ptrdiff_t>(
                  uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k < n ? k : n));
    return idx;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace elicit
