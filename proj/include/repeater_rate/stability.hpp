#pragma once

#include <array>
#include <cstdint>

#include "repeater_rate/params.hpp"

namespace repeater_rate {

/// q^exponent for 0 <= q < 1. Integer exponents go through double-double
/// repeated squaring, others through std::pow.
double stable_power_term(double q, double exponent);

/// (1 - q^j)^n with 1 - q^j formed exactly in double-double, so neither
/// premature rounding to 1 nor underflow to 0 occurs for huge n.
double stable_one_minus_pow(double q, std::int64_t j, std::int64_t n);

/// 1 - (1 - q^j)^n without cancellation when the power is close to 1.
double stable_one_minus_pow_complement(double q, std::int64_t j, std::int64_t n);

/// Alternating perfect-memory sum evaluated term by term in 4-component
/// expansion arithmetic. Exact binomials up to n = 120 (Error{DomainError}
/// beyond).
double perfect_direct_sum(int n, double q);

struct FiniteTauResult {
  double value = 0.0;
  int tau_used = 0;
};

/// Approximates the perfect-memory expectation by <K> at a finite window,
/// doubling tau until successive values differ by less than
/// rel_err_target (relative). Throws Error{NoConvergence} past tau = 2^20.
FiniteTauResult perfect_via_finite_tau(int n, double q, double rel_err_target);

inline constexpr int kFiniteTauMax = 1 << 20;

/// Gaps between truncated sums and their closed forms.
///
/// linear: sum_{k<trunc} (a + b k) q^k  vs  a/(1-q) + b q/(1-q)^2.
/// multi[M-1]: sum over xi in N^M with |xi| < trunc of |xi| q^|xi|  vs
/// M q / (1-q)^(M+1), for M = 1..4; multi_factored compares with
/// (M q / (1-q)) * sum q^|xi| truncated the same way.
struct SeriesIdentityReport {
  double linear_gap = 0.0;
  double linear_bound = 0.0;
  std::array<double, 4> multi_gap{};
  std::array<double, 4> multi_factored_gap{};
  std::array<double, 4> multi_bound{};

  bool within_bounds() const noexcept;
};

/// Throws Error{DomainError} unless |q| < 1 and trunc >= 1.
SeriesIdentityReport verify_series_identities(double a, double b, double q, int trunc);

/// Literal evaluations of the formulas with std::pow and a plain running
/// sum, kept as the reference the stable paths are compared against.
namespace naive {
double sp(int n, int nu, double q);
double game_expectation(const GameParams& params);
}  // namespace naive

}  // namespace repeater_rate
