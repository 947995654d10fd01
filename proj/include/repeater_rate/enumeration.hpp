#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "repeater_rate/params.hpp"
#include "repeater_rate/trajectory.hpp"

namespace repeater_rate {

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000;

/// g-masses of the second-part space, split by outcome, by the step of the
/// last flip (sigma) and by the number of flipped bits (M).
struct MeasureBreakdown {
  double total_mass = 0.0;
  double success_mass = 0.0;
  double failure_mass = 0.0;
  std::vector<double> per_sigma_success;          // [sigma], sigma in [0, tau]
  std::vector<std::vector<double>> per_m_sigma;   // [M][sigma], M in [0, N]
  std::uint64_t count = 0;

  double mass(int m, int sigma) const { return per_m_sigma.at(m).at(sigma); }
};

struct LambdaSums {
  double success = 0.0;  // sum over successes of sigma * g
  double failure = 0.0;  // sum over failures of tau * g
};

struct BetaMass {
  double success = 0.0;
  double failure = 0.0;
};

/// Number of flip-count trajectories for (n, tau), by recursion on the
/// remaining budget. Saturates at UINT64_MAX.
std::uint64_t count_trajectories(int n, int tau);

/// Calls visit for every trajectory in lexicographic order of counts,
/// reusing one buffer. Throws Error{BudgetExceeded} before visiting
/// anything if the count exceeds cap.
void for_each_trajectory(const GameParams& params, const std::function<void(const Trajectory&)>& visit,
                         std::uint64_t cap = kDefaultEnumerationCap);

std::vector<Trajectory> enumerate_gamma(const GameParams& params, std::uint64_t cap = kDefaultEnumerationCap);

/// prod_l C(remaining_before(l), counts[l]) p^counts[l] q^remaining_after(l)
double measure_g(const Trajectory& t, const GameParams& params);

MeasureBreakdown breakdown(const GameParams& params, std::uint64_t cap = kDefaultEnumerationCap);

LambdaSums lambda_sums(const GameParams& params, std::uint64_t cap = kDefaultEnumerationCap);

/// sum_{k=0}^{k_max} q^{Nk} g(S) and the same for g(F).
BetaMass beta_mass_truncated(const GameParams& params, int k_max, std::uint64_t cap = kDefaultEnumerationCap);

/// Pads t with zeros from window tau_from to window tau_to.
/// Throws Error{DomainError} unless tau_to > tau_from == t.window().
Trajectory embed(const Trajectory& t, int tau_from, int tau_to);

/// Writes `gamma;M;sigma;g` rows (counts joined by commas, g with 17
/// significant digits) in lexicographic order. Returns the row count.
std::uint64_t write_enumeration_csv(std::ostream& out, const GameParams& params,
                                    std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace repeater_rate
