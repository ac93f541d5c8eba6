#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace unilamp {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a role label.
constexpr std::uint64_t hash_role(std::string_view role) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : role) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream splitting: a child seed for (role, index) under a master seed.
///
/// derive_seed(s, role, i) = mix64(s ^ hash_role(role)) combined with mix64(i + 1).
/// Distinct roles or indices give statistically independent streams, and the
/// mapping depends only on integer arithmetic, so it is identical on every platform.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                                    std::uint64_t index = 0) noexcept {
  const std::uint64_t a = mix64(master ^ hash_role(role));
  return mix64(a ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: the i-th output is mix64(key + (i+1)·γ).
///
/// State is just (key, counter), so a stream can be positioned anywhere in
/// O(1) and two generators with the same key always agree. Satisfies
/// UniformRandomBitGenerator, but the distributions below are hand-rolled so
/// draws do not depend on the standard library implementation.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform on (0, 1]: 53 random bits, never zero.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    std::uint64_t x = (*this)();
    __uint128_t prod = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        prod = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

  /// Standard normal by Box–Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace unilamp
