// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "repeater_rate/analytic.hpp"
#include "repeater_rate/enumeration.hpp"
#include "repeater_rate/monte_carlo.hpp"
#include "repeater_rate/stability.hpp"

using namespace repeater_rate;

namespace {

constexpr std::array<double, 5> kPs{0.1, 0.3, 0.5, 0.7, 0.9};

double rel(double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::abs(b); }

// Collects the worst deviation and the first failing point of one criterion.
struct Tally {
  double worst = 0.0;
  int cases = 0;
  int failures = 0;
  std::string first;

  void check(bool ok, double err, const std::string& where) {
    ++cases;
    if (!std::isnan(worst)) worst = std::isnan(err) ? err : std::max(worst, err);
    if (!ok && failures++ == 0) first = where;
  }

  void check(double err, double tol, const std::string& where) { check(err <= tol, err, where); }

  bool ok() const { return failures == 0 && cases > 0; }

  std::string summary() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d cases, worst %.3g", cases, worst);
    return failures == 0 ? std::string(buf) : std::string(buf) + ", first failure at " + first;
  }
};

std::string at(double p, int n, int tau, int omega = 0) {
  std::ostringstream s;
  s << "p=" << p << " N=" << n << " tau=" << tau;
  if (omega != 0) s << " omega=" << omega;
  return s.str();
}

struct Outcome {
  bool ok;
  std::string detail;
};

int g_failed = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = o.ok;
  std::string detail = o.detail;
  if (budget_seconds > 0 && secs >= budget_seconds) {
    ok = false;
    detail += "; over the time budget";
  }
  char timing[64];
  if (budget_seconds > 0) {
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, budget_seconds);
  } else {
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
  }
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " [" << timing << "] (" << detail
            << ")" << std::endl;
  if (!ok) ++g_failed;
}

// ---- criteria --------------------------------------------------------------

Outcome closed_form_enumeration() {
  Tally t;
  for (int n = 1; n <= 5; ++n) {
    for (int tau = 0; tau <= 5; ++tau) {
      for (double p : kPs) {
        const GameParams gp = validate_params(p, n, tau);
        const double q = gp.q();
        const MeasureBreakdown b = breakdown(gp);
        const double omq = 1.0 - std::pow(q, n);
        const std::string w = at(p, n, tau);
        t.check(std::abs(b.total_mass - omq), 1e-12, w + " normalization");
        t.check(std::abs(b.success_mass - sp(n, tau, q)), 1e-12, w + " success");
        t.check(std::abs(b.failure_mass - (omq - sp(n, tau, q))), 1e-12, w + " failure");
        for (int s = 0; s <= tau; ++s) {
          t.check(std::abs(b.per_sigma_success[s] - (sp(n, s, q) - sp(n, s - 1, q))), 1e-12,
                  w + " sigma=" + std::to_string(s));
        }
      }
    }
  }
  return {t.ok(), t.summary()};
}

Outcome lambda_equivalence() {
  Tally t;
  for (int n = 1; n <= 5; ++n) {
    for (int tau = 0; tau <= 5; ++tau) {
      for (double p : kPs) {
        const GameParams gp = validate_params(p, n, tau);
        const LambdaSums s = lambda_sums(gp);
        t.check(std::abs(s.success - expected_sum_lambda_success(gp)), 1e-12, at(p, n, tau) + " success");
        t.check(std::abs(s.failure - expected_sum_lambda_failure(gp)), 1e-12, at(p, n, tau) + " failure");
      }
    }
  }
  return {t.ok(), t.summary()};
}

Outcome main_formula() {
  Tally kavr;
  for (int n = 1; n <= 8; ++n) {
    for (int tau = 0; tau <= 12; ++tau) {
      for (double p : kPs) {
        const GameParams gp = validate_params(p, n, tau);
        kavr.check(rel(game_expectation(gp), expected_round_length(gp) / success_probability(gp)), 1e-12,
                   at(p, n, tau));
      }
    }
  }
  Tally alt;
  for (int n = 2; n <= 8; ++n) {
    for (int tau = 2; tau <= 8; ++tau) {
      for (double p : kPs) {
        const GameParams gp = validate_params(p, n, tau);
        alt.check(rel(game_expectation_alt(gp), game_expectation(gp)), 1e-10, at(p, n, tau));
      }
    }
  }
  return {kavr.ok() && alt.ok(), "K = Lambda/P: " + kavr.summary() + "; rearranged form: " + alt.summary()};
}

Outcome exact_anchors() {
  Tally tau0;
  for (int n = 1; n <= 6; ++n) {
    for (double p : kPs) tau0.check(rel(game_expectation(validate_params(p, n, 0)), std::pow(p, -n)), 1e-12, at(p, n, 0));
  }
  Tally det;
  for (int n = 1; n <= 6; ++n) {
    for (int tau = 0; tau <= 6; ++tau) {
      const double k = game_expectation(validate_params(1.0, n, tau));
      det.check(std::abs(k - 1.0), 0.0, at(1.0, n, tau));
    }
  }
  Tally reset;
  for (int n = 1; n <= 6; ++n) {
    for (int tau = 0; tau <= 6; ++tau) {
      for (double p : kPs) {
        for (int omega : {1, 2, 5, 100}) {
          const GameParams gp = validate_params(p, n, tau, omega);
          const double k_omega = reset_expectation(gp);
          const double diff = k_omega - game_expectation(gp);
          const double want = omega * failure_probability(gp) / success_probability(gp);
          // relative to K_omega
          reset.check(std::abs(diff - want) / k_omega, 1e-12, at(p, n, tau, omega));
        }
      }
    }
  }
  return {tau0.ok() && det.ok() && reset.ok(),
          "tau=0: " + tau0.summary() + "; p=1: " + det.summary() + "; reset: " + reset.summary()};
}

Outcome limit_convergence() {
  // The tau = 40 bound is checked on the library values. Strict decrease is
  // judged on quad-double gaps, since for large p the later gaps fall below
  // double resolution; the library gaps must track those to 1e-14.
  Tally bound;
  Tally track;
  Tally order;
  for (int n = 1; n <= 6; ++n) {
    for (double p : {0.3, 0.5, 0.7, 0.9}) {
      const double q = 1.0 - p;
      const double lim = perfect_limit(n, q);
      const QuadDouble lim_qd = oracle::perfect_limit_qd(n, q);
      double prev = INFINITY;
      for (int tau : {10, 20, 40}) {
        const double gap = std::abs(game_expectation(validate_params(p, n, tau)) - lim) / lim;
        const double exact = ((oracle::game_expectation_qd(n, tau, q) - lim_qd) / lim_qd).to_double();
        const std::string w = at(p, n, tau);
        if (tau == 40) bound.check(gap, 1e-6, w);
        track.check(std::abs(gap - exact), 1e-14, w);
        if (n > 1) order.check(exact < prev, exact < prev ? 0.0 : 1.0, w);
        prev = exact;
      }
    }
  }
  return {bound.ok() && track.ok() && order.ok(), "gap(tau=40) < 1e-6: " + bound.summary() +
                                                     "; library vs reference gap: " + track.summary() +
                                                     "; strict decrease: " + order.summary()};
}

Outcome monte_carlo_agreement() {
  Tally steps;
  Tally rounds;
  Tally first;
  SimOptions options;
  options.workers = 4;
  std::uint64_t seed = 20240601;
  for (int n = 1; n <= 4; ++n) {
    for (int tau = 0; tau <= 4; ++tau) {
      for (double p : {0.3, 0.5, 0.7}) {
        for (int omega : {0, 2}) {
          const GameParams gp = validate_params(p, n, tau, omega);
          const SimStats s = estimate(gp, 1'000'000, seed++, options);
          const RateReport r = full_report(gp);
          const std::string w = at(p, n, tau, omega);
          auto z = [](double obs, double want, double se) {
            return se == 0.0 ? (obs == want ? 0.0 : INFINITY) : std::abs(obs - want) / se;
          };
          steps.check(z(s.mean_steps, r.expected_steps_reset, s.std_error_steps()), 4.0, w);
          rounds.check(z(s.mean_failed_rounds, r.failure_prob / r.success_prob, s.std_error_failed_rounds()), 4.0, w);
          const double se_p = std::sqrt(r.success_prob * r.failure_prob / static_cast<double>(s.trials));
          first.check(z(s.empirical_P, r.success_prob, se_p), 4.0, w);
        }
      }
    }
  }
  // Determinism: same seed, different worker count.
  const GameParams gp = validate_params(0.5, 4, 4, 2);
  SimOptions one;
  one.workers = 1;
  const SimStats a = estimate(gp, 200'000, 99, options);
  const SimStats b = estimate(gp, 200'000, 99, one);
  const bool deterministic = a.mean_steps == b.mean_steps && a.var_steps == b.var_steps &&
                             a.failed_round_histogram == b.failed_round_histogram;
  return {steps.ok() && rounds.ok() && first.ok() && deterministic,
          "z(mean steps) " + steps.summary() + "; z(failed rounds) " + rounds.summary() + "; z(P) " + first.summary() +
              (deterministic ? "; deterministic across worker counts" : "; NOT deterministic")};
}

Outcome embedding_relation() {
  Tally t;
  for (int n = 2; n <= 4; ++n) {
    for (int tau = 1; tau <= 4; ++tau) {
      for (int tau_small = 0; tau_small < tau; ++tau_small) {
        for (double p : kPs) {
          const GameParams big = validate_params(p, n, tau);
          const GameParams small = validate_params(p, n, tau_small);
          const std::string w = at(p, n, tau) + " tau'=" + std::to_string(tau_small);
          for_each_trajectory(small, [&](const Trajectory& g) {
            const double factor = std::pow(big.q(), (n - g.total()) * (tau - tau_small));
            t.check(std::abs(measure_g(embed(g, tau_small, tau), big) - factor * measure_g(g, small)), 1e-12, w);
          });
          const MeasureBreakdown wide = breakdown(big);
          const MeasureBreakdown narrow = breakdown(small);
          for (int m = 1; m <= n; ++m) {
            for (int s = 0; s <= tau_small; ++s) {
              const double factor = std::pow(big.q(), (n - m) * (tau - tau_small));
              t.check(std::abs(wide.mass(m, s) - factor * narrow.mass(m, s)), 1e-12,
                      w + " M=" + std::to_string(m) + " sigma=" + std::to_string(s));
            }
          }
        }
      }
    }
  }
  return {t.ok(), t.summary()};
}

Outcome series_identities() {
  Tally t;
  auto run = [&](double a, double b, double q, int trunc) {
    const SeriesIdentityReport r = verify_series_identities(a, b, q, trunc);
    double worst = r.linear_bound > 0 ? r.linear_gap / r.linear_bound : r.linear_gap;
    for (int m = 0; m < 4; ++m) {
      const double g = std::max(r.multi_gap[m], r.multi_factored_gap[m]);
      worst = std::max(worst, r.multi_bound[m] > 0 ? g / r.multi_bound[m] : g);
    }
    std::ostringstream w;
    w << "a=" << a << " b=" << b << " q=" << q << " trunc=" << trunc;
    t.check(r.within_bounds(), worst, w.str());
  };
  run(1, 0, 0.5, 60);
  run(0, 1, 0.5, 100);
  run(1, 1, 0.0, 1);
  const SeriesIdentityReport first = verify_series_identities(1, 0, 0.5, 60);
  t.check(first.linear_gap < std::ldexp(1.0, -50), first.linear_gap, "a=1 b=0 q=0.5 trunc=60 below 2^-50");
  const SeriesIdentityReport exact = verify_series_identities(1, 1, 0.0, 1);
  t.check(exact.linear_gap == 0.0, exact.linear_gap, "q=0 exact");
  for (double q : {-0.9, -0.5, 0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (int trunc : {1, 10, 50, 200}) {
      for (double a : {0.0, 1.0, -2.5}) {
        for (double b : {0.0, 1.0, 4.0}) run(a, b, q, trunc);
      }
    }
  }
  return {t.ok(), t.summary() + " (worst = largest gap / bound)"};
}

Outcome stability() {
  Tally t;
  for (int n : {10, 30, 60, 100}) {
    for (double q : {0.3, 0.5, 0.9}) {
      const double route = perfect_via_finite_tau(n, q, 1e-9).value;
      const double direct = perfect_direct_sum(n, q);
      std::ostringstream w;
      w << "N=" << n << " q=" << q;
      t.check(rel(route, direct), 1e-6, w.str());
    }
  }
  return {t.ok(), t.summary()};
}

// ---- CLI contract ----------------------------------------------------------

struct Shell {
  int code;
  std::string out;
};

Shell shell(const std::string& args) {
  const std::string cmd = std::string(REPEATER_RATE_EXE) + " " + args + " 2>&1";
  Shell s{-1, ""};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return s;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) s.out.append(buf.data(), got);
  const int status = pclose(pipe);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

bool contains(const std::string& text, const std::string& what) { return text.find(what) != std::string::npos; }

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

Outcome cli_contract() {
  namespace fs = std::filesystem;
  Tally t;
  auto expect = [&](bool ok, const std::string& what) { t.check(ok, ok ? 0.0 : 1.0, what); };

  const Shell e1 = shell("eval --p 0.5 --n 2 --tau 1");
  expect(e1.code == 0 && contains(e1.out, "K=3.0\n"), "eval tau=1 prints K=3.0");
  const Shell e0 = shell("eval --p 0.5 --n 2 --tau 0");
  expect(e0.code == 0 && contains(e0.out, "K=4.0\n"), "eval tau=0 prints K=4.0");
  const Shell eb = shell("eval --p 1.5 --n 2 --tau 1");
  expect(eb.code == 2 && contains(eb.out, "InvalidProbability"), "eval p=1.5 exits 2 with InvalidProbability");

  const Shell sw = shell("sweep --p 0.5 --n 2 --tau 0,1");
  bool sweep_ok = sw.code == 0 && count_lines(sw.out) == 3;
  if (sweep_ok) {
    std::istringstream in(sw.out);
    std::string header;
    std::string r0;
    std::string r1;
    std::getline(in, header);
    std::getline(in, r0);
    std::getline(in, r1);
    // K is the 8th column
    auto col = [](const std::string& row, int k) {
      std::istringstream s(row);
      std::string f;
      for (int i = 0; i <= k; ++i) std::getline(s, f, ',');
      return f;
    };
    sweep_ok = header == "p,N,tau,omega,P,Q,Lambda,K,K_omega,limit,rel_gap" && col(r0, 7) == "4.0" &&
               col(r1, 7) == "3.0";
  }
  expect(sweep_ok, "sweep {0.5}x{2}x{0,1} gives 2 rows with K=4.0 and 3.0");
  expect(shell("sweep --p 0.5 --n 2 --tau ''").code == 2, "sweep with an empty tau list exits 2");
  const Shell sj = shell("sweep --p 0.5 --n 2 --tau 0,1 --format json");
  bool json_ok = sj.code == 0;
  if (json_ok) {
    try {
      const auto doc = nlohmann::json::parse(sj.out);
      json_ok = doc.is_array() && doc.size() == 2 && doc[0].size() == 11 && doc[0].contains("K_omega") &&
                doc[1].at("K").get<double>() == 3.0;
    } catch (const std::exception&) {
      json_ok = false;
    }
  }
  expect(json_ok, "sweep json is an array of objects with the csv fields");
  expect(shell("sweep --p 0.5 --n 2 --tau 1 --out /nonexistent-dir/x.csv").code == 3, "sweep I/O failure exits 3");

  const std::string sim = "simulate --p 0.5 --n 2 --tau 1 --trials 1000000 --seed 42";
  const Shell s1 = shell(sim);
  const Shell s2 = shell(sim);
  double z = INFINITY;
  {
    std::istringstream in(s1.out);
    for (std::string l; std::getline(in, l);) {
      if (l.rfind("z_score=", 0) == 0) z = std::stod(l.substr(8));
    }
  }
  expect(s1.code == 0 && std::abs(z) < 4.0, "simulate |z| < 4");
  expect(s1.code == 0 && s1.out == s2.out, "simulate output is byte-identical across runs");
  expect(shell("simulate --p 0.5 --n 2 --tau 1 --trials 0 --seed 42").code == 2, "simulate --trials 0 exits 2");

  const fs::path dump = fs::temp_directory_path() / "repeater_rate_acceptance_g.csv";
  fs::remove(dump);
  const Shell en = shell("enumerate --p 0.5 --n 2 --tau 1 --out " + dump.string());
  int data_rows = -1;
  if (en.code == 0) {
    std::ifstream in(dump);
    std::stringstream buf;
    buf << in.rdbuf();
    data_rows = count_lines(buf.str()) - 1;
  }
  fs::remove(dump);
  expect(en.code == 0 && data_rows == 3, "enumerate N=2 tau=1 writes 3 data rows");
  const Shell big = shell("enumerate --p 0.5 --n 10 --tau 12 --out " + dump.string());
  expect(big.code == 2 && contains(big.out, "BudgetExceeded"), "enumerate N=10 tau=12 exits 2 with BudgetExceeded");
  fs::remove(dump);

  const Shell v = shell("validate --max-n 3 --max-tau 3");
  expect(v.code == 0, "validate --max-n 3 --max-tau 3 exits 0");
  const Shell vd = shell("validate");
  expect(vd.code == 0, "validate with defaults exits 0");
  expect(shell("validate --tol 1e-300 --trials 0").code == 1, "validate with an impossible tolerance exits 1");

  return {t.ok(), t.summary()};
}

}  // namespace

int main(int argc, char** argv) {
  // `acceptance --only K` runs criterion K alone.
  int only = 0;
  if (argc == 3 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);
  auto run = [&](int id, const char* title, double budget, Outcome (*body)()) {
    if (only == 0 || only == id) criterion(id, title, budget, body);
  };
  std::cout << "acceptance suite" << std::endl;
  run(1, "closed-form / enumeration equivalence", 10, closed_form_enumeration);
  run(2, "lambda-sum equivalence", 10, lambda_equivalence);
  run(3, "main-formula consistency", 1, main_formula);
  run(4, "exact anchors", 1, exact_anchors);
  run(5, "limit convergence", 1, limit_convergence);
  run(6, "Monte Carlo agreement (72 points x 1e6 games, 4 workers)", 300, monte_carlo_agreement);
  run(7, "embedding relation", 10, embedding_relation);
  run(8, "series identities", 1, series_identities);
  run(9, "stability of the finite-tau route", 5, stability);
  run(10, "CLI contract", 0, cli_contract);
  if (only != 0) return g_failed == 0 ? 0 : 1;
  std::cout << (g_failed == 0 ? "all 10 criteria passed" : std::to_string(g_failed) + " criteria FAILED") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
