#include "repeater_rate/stability.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "binomial.hpp"
#include "repeater_rate/analytic.hpp"
#include "repeater_rate/error.hpp"
#include "repeater_rate/expansion.hpp"

namespace repeater_rate {

namespace {

void require_q(double q, const char* where) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw Error(ErrorKind::DomainError, std::string(where) + ": q must lie in [0, 1)");
  }
}

bool is_small_integer(double x) {
  return x >= 0.0 && x <= 0x1p53 && std::floor(x) == x;
}

DoubleDouble dd_pow(double q, std::uint64_t j) { return pow(DoubleDouble(q), j); }

// 1 - q^j split as hi + lo with |lo| <= ulp(hi)/2.
struct Split {
  double hi;
  double lo;
};

Split one_minus_q_pow(double q, std::int64_t j) {
  const DoubleDouble r = DoubleDouble(1.0) - dd_pow(q, static_cast<std::uint64_t>(j));
  const double hi = r.hi();
  return {hi, (r - DoubleDouble(hi)).hi()};
}

// n * log(1 - q^j), accurate to a few ulp of the result.
double n_log_one_minus(double q, std::int64_t j, std::int64_t n) {
  const DoubleDouble x = dd_pow(q, static_cast<std::uint64_t>(j));
  const double xh = x.hi();
  const double xl = (x - DoubleDouble(xh)).hi();
  const double l = std::log1p(-xh) - xl / (1.0 - xh);
  return static_cast<double>(n) * l;
}

}  // namespace

double stable_power_term(double q, double exponent) {
  require_q(q, "stable_power_term");
  if (exponent == 0.0) return 1.0;
  if (q == 0.0) return 0.0;
  if (is_small_integer(exponent)) return dd_pow(q, static_cast<std::uint64_t>(exponent)).to_double();
  return std::pow(q, exponent);
}

double stable_one_minus_pow(double q, std::int64_t j, std::int64_t n) {
  require_q(q, "stable_one_minus_pow");
  if (j < 0 || n < 0) throw Error(ErrorKind::DomainError, "stable_one_minus_pow: negative exponent");
  if (n == 0) return 1.0;
  if (j == 0) return 0.0;
  if (q == 0.0) return 1.0;
  const auto [hi, lo] = one_minus_q_pow(q, j);
  const double nd = static_cast<double>(n);
  // (hi + lo)^n = hi^n (1 + lo/hi)^n
  return std::pow(hi, nd) * std::exp(nd * std::log1p(lo / hi));
}

double stable_one_minus_pow_complement(double q, std::int64_t j, std::int64_t n) {
  require_q(q, "stable_one_minus_pow_complement");
  if (j < 0 || n < 0) throw Error(ErrorKind::DomainError, "stable_one_minus_pow_complement: negative exponent");
  if (n == 0) return 0.0;
  if (j == 0) return 1.0;
  if (q == 0.0) return 0.0;
  const double y = n_log_one_minus(q, j, n);
  if (y > -std::numbers::ln2) return -std::expm1(y);
  return 1.0 - stable_one_minus_pow(q, j, n);
}

double perfect_direct_sum(int n, double q) {
  require_q(q, "perfect_direct_sum");
  if (n < 1 || n > detail::kExactBinomialMaxN) {
    throw Error(ErrorKind::DomainError,
                "perfect_direct_sum: N must lie in [1, " + std::to_string(detail::kExactBinomialMaxN) + "]");
  }
  const QuadDouble one(1.0);
  const QuadDouble qq(q);
  QuadDouble power(1.0);
  QuadDouble sum(0.0);
  for (int k = 1; k <= n; ++k) {
    power *= qq;
    const QuadDouble term = QuadDouble::from_u128(detail::binomial_u128(n, k)) / (one - power);
    sum = (k % 2 == 1) ? sum + term : sum - term;
  }
  return sum.to_double();
}

FiniteTauResult perfect_via_finite_tau(int n, double q, double rel_err_target) {
  require_q(q, "perfect_via_finite_tau");
  if (n < 1) throw Error(ErrorKind::DomainError, "perfect_via_finite_tau: N must be >= 1");
  if (!(rel_err_target > 0.0)) throw Error(ErrorKind::DomainError, "perfect_via_finite_tau: target must be > 0");

  int tau = 1;
  double previous = kernels::game_expectation(n, tau, q);
  while (tau < kFiniteTauMax) {
    tau *= 2;
    const double current = kernels::game_expectation(n, tau, q);
    if (std::abs(current - previous) <= rel_err_target * std::abs(current)) return {current, tau};
    previous = current;
  }
  throw Error(ErrorKind::NoConvergence,
              "perfect_via_finite_tau: no convergence up to tau = " + std::to_string(kFiniteTauMax));
}

bool SeriesIdentityReport::within_bounds() const noexcept {
  if (!(linear_gap <= linear_bound)) return false;
  for (std::size_t m = 0; m < multi_gap.size(); ++m) {
    if (!(multi_gap[m] <= multi_bound[m]) || !(multi_factored_gap[m] <= multi_bound[m])) return false;
  }
  return true;
}

SeriesIdentityReport verify_series_identities(double a, double b, double q, int trunc) {
  if (!(std::abs(q) < 1.0)) throw Error(ErrorKind::DomainError, "verify_series_identities: |q| must be < 1");
  if (trunc < 1) throw Error(ErrorKind::DomainError, "verify_series_identities: trunc must be >= 1");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double aq = std::abs(q);
  SeriesIdentityReport report;

  // Linear-weighted geometric series.
  {
    DoubleDouble sum(0.0);
    double qk = 1.0;  // q^0 == 1 including q == 0
    double abs_terms = 0.0;
    for (int k = 0; k < trunc; ++k) {
      const double term = (a + b * k) * qk;
      sum += DoubleDouble(term);
      abs_terms += std::abs(term);
      qk *= q;
    }
    const double closed = a / (1.0 - q) + b * q / ((1.0 - q) * (1.0 - q));
    report.linear_gap = std::abs(sum.to_double() - closed);
    const double t = trunc;
    const double tail = std::pow(aq, t) * (std::abs(a) / (1.0 - aq) +
                                           std::abs(b) * (t / (1.0 - aq) + aq / ((1.0 - aq) * (1.0 - aq))));
    // Each term carries a few rounding errors; the closed form a few more.
    report.linear_bound = tail + 4.0 * eps * (abs_terms + std::abs(closed));
  }

  // Multi-index sums, grouped by s = |xi| with multiplicity C(s+M-1, M-1).
  for (int m = 1; m <= 4; ++m) {
    DoubleDouble weighted(0.0);
    DoubleDouble plain(0.0);
    double abs_weighted = 0.0;
    double qs = 1.0;
    for (int s = 0; s < trunc; ++s) {
      const double mult = static_cast<double>(detail::binomial_u128(s + m - 1, m - 1));
      weighted += DoubleDouble(s * mult * qs);
      plain += DoubleDouble(mult * qs);
      abs_weighted += std::abs(s * mult * qs);
      qs *= q;
    }
    const double closed = m * q / std::pow(1.0 - q, m + 1);
    const double factored = (m * q / (1.0 - q)) * plain.to_double();
    report.multi_gap[m - 1] = std::abs(weighted.to_double() - closed);
    report.multi_factored_gap[m - 1] = std::abs(factored - closed);

    // Tail of sum_{s >= trunc} s C(s+m-1, m-1) |q|^s by the ratio test:
    // t_{s+1}/t_s = (s+m)/s * |q| <= r for s >= trunc.
    const double t = trunc;
    const double r = (t + m) / t * aq;
    double tail = std::numeric_limits<double>::infinity();
    if (r < 1.0) {
      const double first = t * static_cast<double>(detail::binomial_u128(trunc + m - 1, m - 1)) * std::pow(aq, t);
      tail = first / (1.0 - r);
    }
    // The factored route also inherits the tail of sum q^|xi|, scaled by m|q|/(1-q).
    double plain_tail = std::numeric_limits<double>::infinity();
    const double rp = (t + m) / (t + 1.0) * aq;
    if (rp < 1.0) {
      plain_tail = static_cast<double>(detail::binomial_u128(trunc + m - 1, m - 1)) * std::pow(aq, t) / (1.0 - rp);
    }
    const double rounding = 8.0 * eps * (abs_weighted + std::abs(closed));
    report.multi_bound[m - 1] = std::max(tail, m * aq / (1.0 - q) * plain_tail) + rounding;
  }
  return report;
}

namespace naive {

double sp(int n, int nu, double q) {
  if (nu == -1) return 0.0;
  return std::pow(1.0 - std::pow(q, nu + 1), n) - std::pow(q, n) * std::pow(1.0 - std::pow(q, nu), n);
}

double game_expectation(const GameParams& params) {
  const int n = params.n();
  const int tau = params.tau();
  const double q = params.q();
  double sum = 0.0;
  for (int j = 1; j <= tau - 1; ++j) sum += std::pow(1.0 - std::pow(q, j), n);
  const double one_minus_qn = 1.0 - std::pow(q, n);
  const double numerator = 1.0 - std::pow(1.0 - std::pow(q, tau), n) + one_minus_qn * (tau - sum);
  return numerator / sp(n, tau, q);
}

}  // namespace naive

}  // namespace repeater_rate
