#pragma once

#include <array>
#include <cstdint>

#include "repeater_rate/expansion.hpp"

namespace repeater_rate::detail {

inline constexpr int kPascalMaxN = 66;  // C(66, 33) < 2^64
inline constexpr int kExactBinomialMaxN = 120;

/// Exact C(n, k) for 0 <= k <= n <= kPascalMaxN from a precomputed triangle.
std::uint64_t pascal(int n, int k);

/// Exact C(n, k) by the multiplicative recurrence; exact for n <= kExactBinomialMaxN.
constexpr uint128 binomial_u128(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  uint128 c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  return c;
}

inline double binomial(int n, int k) { return static_cast<double>(binomial_u128(n, k)); }

}  // namespace repeater_rate::detail
