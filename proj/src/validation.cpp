#include "repeater_rate/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "repeater_rate/analytic.hpp"
#include "repeater_rate/enumeration.hpp"
#include "repeater_rate/format.hpp"
#include "repeater_rate/monte_carlo.hpp"

namespace repeater_rate {

namespace {

constexpr std::array<double, 5> kProbabilities{0.1, 0.3, 0.5, 0.7, 0.9};
constexpr std::array<double, 3> kSimProbabilities{0.3, 0.5, 0.7};
constexpr std::array<int, 2> kSimOmegas{0, 2};

double rel_err(double actual, double expected) {
  if (actual == expected) return 0.0;
  return std::abs(actual - expected) / std::max(std::abs(expected), 1e-300);
}

class Check {
 public:
  Check(std::string name, double limit) { result_.name = std::move(name), result_.limit = limit; }

  void record(double err, const GameParams& at, const std::string& what = {}) {
    ++result_.cases;
    if (!(err <= result_.limit)) {
      if (result_.failures++ == 0) {
        std::ostringstream s;
        s << "p=" << format_real(at.p()) << " N=" << at.n() << " tau=" << at.tau() << " omega=" << at.omega()
          << (what.empty() ? "" : " " + what) << " err=" << format_real(err);
        result_.first_failure = s.str();
      }
    }
    if (std::isnan(err)) {
      result_.worst = err;
    } else if (!std::isnan(result_.worst)) {
      result_.worst = std::max(result_.worst, err);
    }
  }

  CheckResult take() { return std::move(result_); }

 private:
  CheckResult result_;
};

template <typename Fn>
void for_grid(const ValidationOptions& o, int min_n, int min_tau, Fn&& fn) {
  for (int n = min_n; n <= o.max_n; ++n) {
    for (int tau = min_tau; tau <= o.max_tau; ++tau) {
      for (double p : kProbabilities) fn(validate_params(p, n, tau));
    }
  }
}

void enumeration_checks(const ValidationOptions& o, std::vector<CheckResult>& out) {
  Check normalization("enumeration: total g-mass = 1 - q^N", o.tol);
  Check success("enumeration: g(S) = sp(N,tau)", o.tol);
  Check failure("enumeration: g(F) = 1 - q^N - sp(N,tau)", o.tol);
  Check per_sigma("enumeration: g(S^sigma) = sp(N,sigma) - sp(N,sigma-1)", o.tol);
  Check telescoping("enumeration: sum_{sigma<=t} g(S^sigma) = sp(N,t)", o.tol);
  Check partition("enumeration: (M,sigma) cells partition the space", o.tol);
  Check lambda_s("lambda sums: successes match closed form", o.tol);
  Check lambda_f("lambda sums: failures match closed form", o.tol);
  Check beta("round measure: truncated k-sums reach P and Q", o.tol);

  for_grid(o, 1, 0, [&](const GameParams& gp) {
    const int n = gp.n();
    const int tau = gp.tau();
    const double q = gp.q();
    const MeasureBreakdown b = breakdown(gp);
    const double omq = kernels::one_minus_q_pow_n(n, q);
    const double s = sp(n, tau, q);
    normalization.record(std::abs(b.total_mass - omq), gp);
    success.record(std::abs(b.success_mass - s), gp);
    failure.record(std::abs(b.failure_mass - (omq - s)), gp);
    double prefix = 0.0;
    for (int sigma = 0; sigma <= tau; ++sigma) {
      per_sigma.record(std::abs(b.per_sigma_success[sigma] - (sp(n, sigma, q) - sp(n, sigma - 1, q))), gp,
                       "sigma=" + std::to_string(sigma));
      prefix += b.per_sigma_success[sigma];
      telescoping.record(std::abs(prefix - sp(n, sigma, q)), gp, "t=" + std::to_string(sigma));
    }
    double cells = 0.0;
    for (const auto& row : b.per_m_sigma) {
      for (double m : row) cells += m;
    }
    partition.record(std::abs(cells - b.total_mass) + (b.count == count_trajectories(n, tau) ? 0.0 : 1.0), gp);

    const LambdaSums ls = lambda_sums(gp);
    lambda_s.record(std::abs(ls.success - expected_sum_lambda_success(gp)), gp);
    lambda_f.record(std::abs(ls.failure - expected_sum_lambda_failure(gp)), gp);

    const int k_max = 400;
    const BetaMass bm = beta_mass_truncated(gp, k_max);
    const double tail = std::pow(q, static_cast<double>(n) * (k_max + 1)) / omq;
    beta.record(std::max(std::abs(bm.success + tail * b.success_mass - success_probability(gp)),
                         std::abs(bm.failure + tail * b.failure_mass - failure_probability(gp))),
                gp);
  });

  // Embedding: g_(N,tau)(Gamma_M^sigma) = q^((N-M)(tau-tau')) g_(N,tau')(Gamma_M^sigma).
  Check embedding("embedding: cell masses scale by q^((N-M)(tau-tau'))", o.tol);
  for (int n = 2; n <= o.max_n; ++n) {
    for (double p : kProbabilities) {
      for (int tau = 1; tau <= o.max_tau; ++tau) {
        const GameParams big = validate_params(p, n, tau);
        const MeasureBreakdown wide = breakdown(big);
        for (int tau_small = 0; tau_small < tau; ++tau_small) {
          const MeasureBreakdown narrow = breakdown(validate_params(p, n, tau_small));
          for (int m = 1; m <= n; ++m) {
            for (int sigma = 0; sigma <= tau_small; ++sigma) {
              const double factor = std::pow(big.q(), static_cast<double>((n - m) * (tau - tau_small)));
              embedding.record(std::abs(wide.mass(m, sigma) - factor * narrow.mass(m, sigma)), big,
                               "tau'=" + std::to_string(tau_small));
            }
          }
        }
      }
    }
  }

  out.push_back(normalization.take());
  out.push_back(success.take());
  out.push_back(failure.take());
  out.push_back(per_sigma.take());
  out.push_back(telescoping.take());
  out.push_back(partition.take());
  out.push_back(lambda_s.take());
  out.push_back(lambda_f.take());
  out.push_back(beta.take());
  out.push_back(embedding.take());
}

void closed_form_checks(const ValidationOptions& o, std::vector<CheckResult>& out) {
  Check kavr("closed form: <K> = <Lambda> / P", o.tol);
  Check assembly("closed form: step sums of S and F add to <Lambda>", o.tol);
  Check toy("closed form: A + (B + omega) Q / P = <K_omega>", o.tol);
  Check reset("closed form: <K_omega> = <K> + omega Q / P", o.tol);
  Check alt("closed form: rearranged <K> agrees (N, tau >= 2)", o.tol);
  Check tau0("anchor: <K>(tau=0) = p^-N", o.tol);
  Check deterministic("anchor: p = 1 gives <K> = <Lambda> = 1", o.tol);

  for_grid(o, 1, 0, [&](const GameParams& gp) {
    const double k = game_expectation(gp);
    kavr.record(rel_err(k, expected_round_length(gp) / success_probability(gp)), gp);
    assembly.record(rel_err(round_steps_sum_success(gp) + round_steps_sum_failure(gp), expected_round_length(gp)),
                    gp);
    for (int omega : {0, 2, 5}) {
      const GameParams g2 = gp.with_omega(omega);
      const ToyDecomposition t = toy_decomposition(g2);
      toy.record(rel_err(t.expected_steps(omega), reset_expectation(g2)), g2);
      reset.record(rel_err(reset_expectation(g2),
                           k + omega * failure_probability(g2) / success_probability(g2)),
                   g2);
    }
    if (gp.n() >= 2 && gp.tau() >= 2) alt.record(rel_err(game_expectation_alt(gp), k), gp);
    if (gp.tau() == 0) tau0.record(rel_err(k, std::pow(gp.p(), -gp.n())), gp);
  });
  for (int n = 1; n <= o.max_n; ++n) {
    for (int tau = 0; tau <= o.max_tau; ++tau) {
      const GameParams gp = validate_params(1.0, n, tau);
      deterministic.record(std::max(std::abs(game_expectation(gp) - 1.0), std::abs(expected_round_length(gp) - 1.0)),
                           gp);
    }
  }

  // Convergence to the perfect-memory limit at tau = 10, 20, 40.
  Check limit("limit: gaps at tau = 10, 20, 40 strictly decrease", 0.0);
  for (int n = 1; n <= std::max(o.max_n, 1); ++n) {
    for (double p : {0.3, 0.5, 0.7, 0.9}) {
      const GameParams gp = validate_params(p, n, 0);
      const double lim = full_report(gp).perfect_limit;
      double previous = INFINITY;
      int violations = 0;
      for (int tau : {10, 20, 40}) {
        const double gap = std::abs(game_expectation(gp.with_tau(tau)) - lim) / lim;
        // Gaps already at rounding level count as converged.
        if (!(gap < previous || gap <= 1e-15)) ++violations;
        previous = gap;
      }
      limit.record(violations, gp);
    }
  }

  out.push_back(kavr.take());
  out.push_back(assembly.take());
  out.push_back(toy.take());
  out.push_back(reset.take());
  out.push_back(alt.take());
  out.push_back(tau0.take());
  out.push_back(deterministic.take());
  out.push_back(limit.take());
}

void simulation_checks(const ValidationOptions& o, std::vector<CheckResult>& out) {
  Check steps("simulation: mean steps vs <K_omega>", o.z_limit);
  Check rounds("simulation: mean failed rounds vs Q/P", o.z_limit);
  Check first("simulation: first-round win rate vs P", o.z_limit);
  Check length("simulation: mean round length vs <Lambda>", o.z_limit);
  Check fast("simulation (fast-forward): mean steps vs <K_omega>", o.z_limit);
  SimOptions sim;
  sim.workers = o.workers;
  SimOptions sim_fast = sim;
  sim_fast.fast_forward = true;

  auto z = [](double observed, double expected, double se) {
    if (se == 0.0) return observed == expected ? 0.0 : INFINITY;
    return std::abs(observed - expected) / se;
  };

  std::uint64_t point = 0;
  for (int n = 1; n <= o.max_n; ++n) {
    for (int tau = 0; tau <= o.max_tau; ++tau) {
      for (double p : kSimProbabilities) {
        for (int omega : kSimOmegas) {
          const GameParams gp = validate_params(p, n, tau, omega);
          const SimStats s = estimate(gp, o.trials, o.seed + point++, sim);
          const RateReport r = full_report(gp);
          steps.record(z(s.mean_steps, r.expected_steps_reset, s.std_error_steps()), gp);
          rounds.record(z(s.mean_failed_rounds, r.failure_prob / r.success_prob, s.std_error_failed_rounds()), gp);
          const double se_p = std::sqrt(r.success_prob * r.failure_prob / static_cast<double>(s.trials));
          first.record(z(s.empirical_P, r.success_prob, se_p), gp);
          length.record(z(s.mean_round_steps, r.expected_round_length, s.std_error_round_steps()), gp);
          const SimStats f = estimate(gp, o.trials, o.seed + point++, sim_fast);
          fast.record(z(f.mean_steps, r.expected_steps_reset, f.std_error_steps()), gp);
        }
      }
    }
  }
  out.push_back(steps.take());
  out.push_back(rounds.take());
  out.push_back(first.take());
  out.push_back(length.take());
  out.push_back(fast.take());
}

}  // namespace

bool ValidationReport::all_passed() const noexcept {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

ValidationReport run_validation(const ValidationOptions& options) {
  ValidationReport report;
  enumeration_checks(options, report.checks);
  closed_form_checks(options, report.checks);
  if (options.trials > 0) simulation_checks(options, report.checks);
  return report;
}

void print_validation_table(std::ostream& out, const ValidationReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-58s %7s %12s %12s\n", "status", "check", "cases", "worst", "limit");
  out << line;
  for (const CheckResult& c : report.checks) {
    std::snprintf(line, sizeof line, "%-6s %-58s %7d %12.3e %12.3e\n", c.passed() ? "PASS" : "FAIL", c.name.c_str(),
                  c.cases, c.worst, c.limit);
    out << line;
    if (!c.first_failure.empty()) out << "       first failure: " << c.first_failure << '\n';
  }
  out << (report.all_passed() ? "all checks passed\n" : "validation FAILED\n");
}

}  // namespace repeater_rate
