#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "unilamp/error.hpp"

namespace unilamp {

constexpr bool is_power_of_two(std::size_t m) noexcept { return m >= 1 && std::has_single_bit(m); }

namespace detail {

template <typename T>
void walsh_butterflies(std::span<T> v) {
  const std::size_t m = v.size();
  for (std::size_t h = 1; h < m; h <<= 1) {
    for (std::size_t i = 0; i < m; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const T a = v[j];
        const T b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

inline void require_power_of_two(std::size_t m, const char* what) {
  require(is_power_of_two(m) && m >= 2, ErrorKind::invalid_dimension,
          std::string(what) + ": length " + std::to_string(m) + " is not a power of two >= 2");
}

}  // namespace detail

/// In-place orthonormal Walsh–Hadamard transform, v <- H v.
///
/// Natural (Sylvester) ordering, so H_ij = (-1)^<bits(i-1), bits(j-1)> / sqrt(m).
/// The 1/sqrt(m) scale is applied once after the butterflies; H is symmetric
/// and H·H = I under this scaling.
inline void fwht_inplace(std::span<double> v) {
  detail::require_power_of_two(v.size(), "fwht_inplace");
  detail::walsh_butterflies(v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (double& x : v) x *= scale;
}

/// Unnormalised transform on integers; exact as long as the sums fit.
inline void walsh_counts_inplace(std::span<std::int64_t> v) {
  detail::require_power_of_two(v.size(), "walsh_counts_inplace");
  detail::walsh_butterflies(v);
}

/// Sign (-1)^<bits(i-1), bits(j-1)> for 1-based indices, no range checks.
constexpr int walsh_sign(std::size_t i, std::size_t j) noexcept {
  return (std::popcount((i - 1) & (j - 1)) & 1) ? -1 : 1;
}

inline void require_index(std::size_t i, std::size_t m, const char* what) {
  require(i >= 1 && i <= m, ErrorKind::out_of_range,
          std::string(what) + ": index " + std::to_string(i) + " outside [1, " + std::to_string(m) + "]");
}

/// Entry (i, j) of the orthonormal m×m Hadamard–Walsh matrix, 1-based.
inline double hadamard_entry(std::size_t i, std::size_t j, std::size_t m) {
  detail::require_power_of_two(m, "hadamard_entry");
  require_index(i, m, "hadamard_entry");
  require_index(j, m, "hadamard_entry");
  return walsh_sign(i, j) / std::sqrt(static_cast<double>(m));
}

/// i ⊕ j on 1-based labels: ((i-1) XOR (j-1)) + 1.
///
/// Satisfies sqrt(m) (h_i ⊙ h_j) = h_{i⊕j} for the columns of H.
inline std::size_t xor_index(std::size_t i, std::size_t j, std::size_t m) {
  detail::require_power_of_two(m, "xor_index");
  require_index(i, m, "xor_index");
  require_index(j, m, "xor_index");
  return ((i - 1) ^ (j - 1)) + 1;
}

}  // namespace unilamp
