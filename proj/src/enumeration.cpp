#include "repeater_rate/enumeration.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "binomial.hpp"
#include "repeater_rate/format.hpp"
#include "repeater_rate/error.hpp"

namespace repeater_rate {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

// Sequences of `slots` nonnegative counts with sum <= budget.
std::uint64_t count_tails(int budget, int slots, std::vector<std::vector<std::uint64_t>>& memo) {
  if (slots == 0) return 1;
  std::uint64_t& cached = memo[budget][slots];
  if (cached != 0) return cached;
  std::uint64_t total = 0;
  for (int c = 0; c <= budget; ++c) total = saturating_add(total, count_tails(budget - c, slots - 1, memo));
  cached = total;
  return total;
}

double int_pow(double base, int e) {
  double r = 1.0;
  for (; e > 0; --e) r *= base;
  return r;
}

void require_enumerable(const GameParams& params, std::uint64_t cap) {
  if (params.n() > detail::kPascalMaxN) {
    throw Error(ErrorKind::DomainError,
                "enumeration supports N <= " + std::to_string(detail::kPascalMaxN));
  }
  const std::uint64_t predicted = count_trajectories(params.n(), params.tau());
  if (predicted > cap) {
    throw Error(ErrorKind::BudgetExceeded, "|Gamma(" + std::to_string(params.n()) + "," +
                                               std::to_string(params.tau()) + ")| = " +
                                               (predicted == kSaturated ? std::string(">= 2^64") : std::to_string(predicted)) +
                                               " exceeds the cap of " + std::to_string(cap));
  }
}

}  // namespace

std::uint64_t count_trajectories(int n, int tau) {
  if (n < 1 || tau < 0) return 0;
  std::vector<std::vector<std::uint64_t>> memo(n + 1, std::vector<std::uint64_t>(tau + 1, 0));
  std::uint64_t total = 0;
  for (int first = 1; first <= n; ++first) total = saturating_add(total, count_tails(n - first, tau, memo));
  return total;
}

void for_each_trajectory(const GameParams& params, const std::function<void(const Trajectory&)>& visit,
                         std::uint64_t cap) {
  require_enumerable(params, cap);
  const int n = params.n();
  const int len = params.tau() + 1;
  std::vector<int> counts(len, 0);

  // Odometer over counts in lexicographic order: start at [1, 0, ..., 0].
  counts[0] = 1;
  int used = 1;
  while (true) {
    visit(Trajectory(counts, n));
    // Increment the last position that still has budget, zeroing the rest.
    int pos = len - 1;
    while (pos >= 0) {
      if (used < n) {
        ++counts[pos];
        ++used;
        break;
      }
      used -= counts[pos];
      counts[pos] = 0;
      --pos;
    }
    if (pos < 0) return;
  }
}

std::vector<Trajectory> enumerate_gamma(const GameParams& params, std::uint64_t cap) {
  require_enumerable(params, cap);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count_trajectories(params.n(), params.tau())));
  for_each_trajectory(params, [&](const Trajectory& t) { out.push_back(t); }, cap);
  return out;
}

double measure_g(const Trajectory& t, const GameParams& params) {
  const double p = params.p();
  const double q = params.q();
  auto counts = t.counts();
  double g = 1.0;
  int before = t.memories();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const int after = before - counts[l];
    g *= static_cast<double>(detail::pascal(before, counts[l])) * int_pow(p, counts[l]) * int_pow(q, after);
    before = after;
  }
  return g;
}

MeasureBreakdown breakdown(const GameParams& params, std::uint64_t cap) {
  const int n = params.n();
  const int tau = params.tau();
  MeasureBreakdown b;
  b.per_sigma_success.assign(tau + 1, 0.0);
  b.per_m_sigma.assign(n + 1, std::vector<double>(tau + 1, 0.0));
  for_each_trajectory(
      params,
      [&](const Trajectory& t) {
        const double g = measure_g(t, params);
        const int sigma = trajectory_sigma(t);
        b.per_m_sigma[t.total()][sigma] += g;
        if (trajectory_is_success(t, params)) {
          b.success_mass += g;
          b.per_sigma_success[sigma] += g;
        } else {
          b.failure_mass += g;
        }
        b.total_mass += g;
        ++b.count;
      },
      cap);
  return b;
}

LambdaSums lambda_sums(const GameParams& params, std::uint64_t cap) {
  LambdaSums s;
  for_each_trajectory(
      params,
      [&](const Trajectory& t) {
        const double g = measure_g(t, params);
        if (trajectory_is_success(t, params)) {
          s.success += trajectory_sigma(t) * g;
        } else {
          s.failure += params.tau() * g;
        }
      },
      cap);
  return s;
}

BetaMass beta_mass_truncated(const GameParams& params, int k_max, std::uint64_t cap) {
  if (k_max < 0) throw Error(ErrorKind::DomainError, "beta_mass_truncated: k_max must be >= 0");
  const MeasureBreakdown b = breakdown(params, cap);
  const double qn = int_pow(params.q(), params.n());
  BetaMass m;
  double weight = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    m.success += weight * b.success_mass;
    m.failure += weight * b.failure_mass;
    weight *= qn;
  }
  return m;
}

Trajectory embed(const Trajectory& t, int tau_from, int tau_to) {
  if (tau_to <= tau_from) throw Error(ErrorKind::DomainError, "embed: tau_to must exceed tau_from");
  if (t.window() != tau_from) throw Error(ErrorKind::DomainError, "embed: trajectory window differs from tau_from");
  std::vector<int> counts(t.counts().begin(), t.counts().end());
  counts.resize(tau_to + 1, 0);
  return Trajectory(std::move(counts), t.memories());
}

std::uint64_t write_enumeration_csv(std::ostream& out, const GameParams& params, std::uint64_t cap) {
  require_enumerable(params, cap);
  out << "gamma;M;sigma;g\n";
  std::uint64_t rows = 0;
  for_each_trajectory(
      params,
      [&](const Trajectory& t) {
        auto counts = t.counts();
        for (std::size_t l = 0; l < counts.size(); ++l) {
          if (l != 0) out << ',';
          out << counts[l];
        }
        out << ';' << t.total() << ';' << trajectory_sigma(t) << ';' << format_real(measure_g(t, params)) << '\n';
        ++rows;
      },
      cap);
  return rows;
}

}  // namespace repeater_rate
