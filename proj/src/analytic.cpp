#include "repeater_rate/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "binomial.hpp"
#include "repeater_rate/error.hpp"
#include "repeater_rate/expansion.hpp"
#include "repeater_rate/stability.hpp"

namespace repeater_rate {

namespace {

void require_q(double q, const char* where) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw Error(ErrorKind::DomainError, std::string(where) + ": q must lie in [0, 1), got " + std::to_string(q));
  }
}

void require_n(int n, const char* where) {
  if (n < 1) throw Error(ErrorKind::DomainError, std::string(where) + ": N must be >= 1");
}

// 1 - (1 - q^j)^n: probability that not all n bits flipped within j trials.
double unfinished(int n, std::int64_t j, double q) { return stable_one_minus_pow_complement(q, j, n); }

// sum_{j=1}^{tau-1} (1 - (1-q^j)^n). Stops once the remaining terms,
// bounded by n q^j / (1 - q), cannot move 1 + sum.
double unfinished_sum(int n, int tau, double q) {
  double sum = 0.0;
  double qj = 1.0;
  for (int j = 1; j <= tau - 1; ++j) {
    qj *= q;
    if (static_cast<double>(n) * qj / (1.0 - q) < 0x1p-60 * (1.0 + sum)) break;
    sum += unfinished(n, j, q);
  }
  return sum;
}

// sum_{j=0}^{tau-1} sp(n, j)
double sp_prefix_sum(int n, int tau, double q) {
  DoubleDouble sum(0.0);
  for (int j = 0; j < tau; ++j) sum += DoubleDouble(sp(n, j, q));
  return sum.to_double();
}

bool is_trivial(const GameParams& params) { return params.n() == 1 || params.q() == 0.0; }

}  // namespace

namespace kernels {

double one_minus_q_pow_n(int n, double q) { return stable_one_minus_pow(q, n, 1); }

double game_expectation(int n, int tau, double q) {
  require_n(n, "game_expectation");
  require_q(q, "game_expectation");
  if (q == 0.0) return 1.0;
  if (tau == 0) return 1.0 / sp(n, 0, q);
  const double omq = one_minus_q_pow_n(n, q);
  const double numerator = unfinished(n, tau, q) + omq * (1.0 + unfinished_sum(n, tau, q));
  return numerator / sp(n, tau, q);
}

double expected_round_length(int n, int tau, double q) {
  require_n(n, "expected_round_length");
  require_q(q, "expected_round_length");
  if (q == 0.0) return 1.0;
  const double omq = one_minus_q_pow_n(n, q);
  if (tau == 0) return 1.0 / omq;
  return 1.0 + unfinished_sum(n, tau, q) + unfinished(n, tau, q) / omq;
}

}  // namespace kernels

double sp(int n, int nu, double q) {
  require_n(n, "sp");
  require_q(q, "sp");
  if (nu < -1) throw Error(ErrorKind::DomainError, "sp: nu must be >= -1");
  if (nu == -1) return 0.0;
  const double reached = stable_one_minus_pow(q, nu + 1, n);
  const double early = stable_power_term(q, n) * stable_one_minus_pow(q, nu, n);
  return reached - early;
}

double perfect_expectation(int n, double q) {
  require_n(n, "perfect_expectation");
  require_q(q, "perfect_expectation");
  if (q == 0.0) return 1.0;
  if (n <= kDirectSumMaxN) return perfect_direct_sum(n, q);
  return perfect_via_finite_tau(n, q, 1e-15).value;
}

double perfect_limit(int n, double q) { return perfect_expectation(n, q); }

double at_least_m_expectation(int m, int n, double q) {
  require_n(n, "at_least_m_expectation");
  if (m < 1 || m > n) throw Error(ErrorKind::DomainError, "at_least_m_expectation: m must lie in [1, N]");
  if (q == 1.0) throw Error(ErrorKind::DegenerateCase, "at_least_m_expectation: q = 1 never flips");
  require_q(q, "at_least_m_expectation");
  if (q == 0.0) return 1.0;
  // E[T_(m:N)] = sum_{k=N-m+1}^{N} (-1)^(k-N+m-1) C(k-1, N-m) C(N, k) / (1 - q^k)
  const QuadDouble one(1.0);
  QuadDouble sum(0.0);
  const int lowest = n - m + 1;
  for (int k = lowest; k <= n; ++k) {
    const QuadDouble coeff =
        QuadDouble::from_u128(detail::binomial_u128(k - 1, n - m) * detail::binomial_u128(n, k));
    const QuadDouble term = coeff / (one - pow(QuadDouble(q), k));
    sum = ((k - lowest) % 2 == 0) ? sum + term : sum - term;
  }
  return sum.to_double();
}

double at_least_m_published_form(int m, int n, double q) {
  require_n(n, "at_least_m_published_form");
  if (m < 1 || m > n) throw Error(ErrorKind::DomainError, "at_least_m_published_form: m must lie in [1, N]");
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::DegenerateCase, "at_least_m_published_form: needs 0 < q < 1");
  }
  double falling = 1.0;  // N! / (N-m)!
  for (int i = 0; i < m; ++i) falling *= n - i;
  double factorial = 1.0;  // (m-1)!
  for (int i = 2; i < m; ++i) factorial *= i;
  double sum = 0.0;
  for (int k = 0; k <= m - 1; ++k) {
    const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
    const double qk = std::pow(q, k);
    sum += sign / (m - k) * detail::binomial(m - 1, k) * falling * qk / (std::pow(q, n) - qk);
  }
  return sum / factorial;
}

double success_probability(const GameParams& params) {
  if (is_trivial(params)) return 1.0;
  const double p = sp(params.n(), params.tau(), params.q()) / kernels::one_minus_q_pow_n(params.n(), params.q());
  return std::min(p, 1.0);
}

double failure_probability(const GameParams& params) {
  if (is_trivial(params)) return 0.0;
  const double omq = kernels::one_minus_q_pow_n(params.n(), params.q());
  return std::max(0.0, (omq - sp(params.n(), params.tau(), params.q())) / omq);
}

double expected_sum_lambda_failure(const GameParams& params) {
  if (is_trivial(params) || params.tau() == 0) return 0.0;
  const double omq = kernels::one_minus_q_pow_n(params.n(), params.q());
  return params.tau() * (omq - sp(params.n(), params.tau(), params.q()));
}

double expected_sum_lambda_success(const GameParams& params) {
  const int n = params.n();
  const int tau = params.tau();
  const double q = params.q();
  if (tau == 0) return 0.0;
  return tau * sp(n, tau, q) - sp_prefix_sum(n, tau, q);
}

double round_steps_sum_success(const GameParams& params) {
  const int n = params.n();
  const int tau = params.tau();
  const double q = params.q();
  const double omq = kernels::one_minus_q_pow_n(n, q);
  return ((1.0 / omq + tau) * sp(n, tau, q) - sp_prefix_sum(n, tau, q)) / omq;
}

double round_steps_sum_failure(const GameParams& params) {
  const double omq = kernels::one_minus_q_pow_n(params.n(), params.q());
  return (params.tau() + 1.0 / omq) * failure_probability(params);
}

double expected_round_length(const GameParams& params) {
  if (params.n() == 1) return 1.0 / params.p();
  return kernels::expected_round_length(params.n(), params.tau(), params.q());
}

double game_expectation(const GameParams& params) {
  if (params.n() == 1) return 1.0 / params.p();
  return kernels::game_expectation(params.n(), params.tau(), params.q());
}

double game_expectation_alt(const GameParams& params) {
  const int n = params.n();
  const int tau = params.tau();
  const double q = params.q();
  if (n < 2 || tau < 2) throw Error(ErrorKind::DomainError, "game_expectation_alt: needs N >= 2 and tau >= 2");
  const double omq = kernels::one_minus_q_pow_n(n, q);
  const double qn = stable_power_term(q, n);
  DoubleDouble num(omq);
  DoubleDouble den(omq);
  for (int k = 1; k <= n; ++k) {
    const double signed_binom = ((k % 2 == 0) ? 1.0 : -1.0) * detail::binomial(n, k);
    const double q_tau_k = stable_power_term(q, static_cast<double>(tau) * k);
    const double qk = stable_power_term(q, k);
    // sum_{j=1}^{tau-1} q^{jk} = q^k (1 - q^{(tau-1)k}) / (1 - q^k)
    const double partial = qk * stable_one_minus_pow(q, static_cast<std::int64_t>(tau - 1) * k, 1) /
                           stable_one_minus_pow(q, k, 1);
    num = num - DoubleDouble(signed_binom * (q_tau_k + omq * partial));
    if (k < n) den = den + DoubleDouble(signed_binom * q_tau_k * (qk - qn));
  }
  return num.to_double() / den.to_double();
}

double reset_expectation(const GameParams& params) {
  const double k = game_expectation(params);
  if (params.omega() == 0) return k;
  return k + params.omega() * failure_probability(params) / success_probability(params);
}

double ToyDecomposition::expected_steps(double omega) const {
  if (failure_prob == 0.0) return success_round_mean;
  return success_round_mean + (failure_round_mean + omega) * failure_prob / success_prob;
}

ToyDecomposition toy_decomposition(const GameParams& params) {
  ToyDecomposition toy;
  toy.success_prob = success_probability(params);
  toy.failure_prob = failure_probability(params);
  toy.success_round_mean = round_steps_sum_success(params) / toy.success_prob;
  toy.failure_round_mean = toy.failure_prob == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                                   : round_steps_sum_failure(params) / toy.failure_prob;
  return toy;
}

RateReport full_report(const GameParams& params) {
  RateReport r;
  r.success_prob = success_probability(params);
  r.failure_prob = failure_probability(params);
  r.expected_round_length = expected_round_length(params);
  r.expected_steps = game_expectation(params);
  r.expected_steps_reset = reset_expectation(params);
  r.perfect_limit = params.n() == 1 ? 1.0 / params.p() : perfect_limit(params.n(), params.q());
  r.rel_gap_to_limit = std::abs(r.expected_steps - r.perfect_limit) / r.perfect_limit;
  return r;
}

}  // namespace repeater_rate
