#pragma once

#include "repeater_rate/params.hpp"

namespace repeater_rate {

/// All closed-form rates of one parameter point.
struct RateReport {
  double success_prob = 0.0;           // P: a round ends with all N bits set
  double failure_prob = 0.0;           // Q = 1 - P
  double expected_round_length = 0.0;  // <Lambda>, steps per round
  double expected_steps = 0.0;         // <K> = <Lambda> / P
  double expected_steps_reset = 0.0;   // <K> + omega * Q / P
  double perfect_limit = 0.0;          // tau -> infinity value of <K>
  double rel_gap_to_limit = 0.0;       // |<K> - limit| / limit
};

/// Success mass of a round with n bits and window nu:
/// (1 - q^(nu+1))^n - q^n (1 - q^nu)^n, and exactly 0 for nu == -1.
/// Throws Error{DomainError} unless n >= 1, nu >= -1, 0 <= q < 1.
double sp(int n, int nu, double q);

/// Expected trials until all N independent p-Bernoulli bits have flipped
/// (no expiry): sum_{k=1}^{N} C(N,k) (-1)^(k+1) / (1 - q^k).
///
/// For N <= kDirectSumMaxN the alternating sum is evaluated in expansion
/// arithmetic; above that the finite-window route in stability.hpp is used.
double perfect_expectation(int n, double q);

inline constexpr int kDirectSumMaxN = 60;

/// Same quantity reached as the tau -> infinity limit of game_expectation.
/// Shares perfect_expectation's code path.
double perfect_limit(int n, double q);

/// Expected trials until at least m of N bits have flipped (m-th order
/// statistic of N geometric variables). q == 0 yields 1; q == 1 throws
/// Error{DegenerateCase}; m outside [1, N] throws Error{DomainError}.
double at_least_m_expectation(int m, int n, double q);

/// The published closed form for the at-least-m expectation, evaluated
/// literally. Coincides with at_least_m_expectation only for m == N.
double at_least_m_published_form(int m, int n, double q);

/// P = sp(N, tau) / (1 - q^N).
double success_probability(const GameParams& params);
/// Q = 1 - P.
double failure_probability(const GameParams& params);

/// Window-weighted mass of failed second parts: tau * (1 - q^N - sp(N, tau)).
double expected_sum_lambda_failure(const GameParams& params);
/// Sigma-weighted mass of successful second parts: tau sp(N,tau) - sum_{j<tau} sp(N,j).
double expected_sum_lambda_success(const GameParams& params);

/// Step sum of successful rounds weighted by the round measure (not a mean).
double round_steps_sum_success(const GameParams& params);
/// Step sum of failed rounds weighted by the round measure: (tau + 1/(1-q^N)) Q.
double round_steps_sum_failure(const GameParams& params);

/// <Lambda> = tau + (1 - (1-q^tau)^N) / (1-q^N) - sum_{j=1}^{tau-1} (1-q^j)^N.
double expected_round_length(const GameParams& params);

/// <K>: expected steps until a round succeeds, resets included.
double game_expectation(const GameParams& params);

/// <K> through the alternating-sum rearrangement of numerator and
/// denominator. Requires N >= 2 and tau >= 2, else Error{DomainError}.
double game_expectation_alt(const GameParams& params);

/// <K> + omega * Q / P.
double reset_expectation(const GameParams& params);

/// Mean steps of a successful round (A) and of a failed round (B); the game
/// mean is A + (B + omega) Q / P. B is NaN when Q == 0.
struct ToyDecomposition {
  double success_round_mean = 0.0;
  double failure_round_mean = 0.0;
  double success_prob = 0.0;
  double failure_prob = 0.0;

  double expected_steps(double omega = 0.0) const;
};

ToyDecomposition toy_decomposition(const GameParams& params);

RateReport full_report(const GameParams& params);

/// q-parameterised kernels, for callers that hold q rather than p
/// (1 - (1 - q) need not round-trip to q).
namespace kernels {
double one_minus_q_pow_n(int n, double q);
double game_expectation(int n, int tau, double q);
double expected_round_length(int n, int tau, double q);
}  // namespace kernels

}  // namespace repeater_rate
