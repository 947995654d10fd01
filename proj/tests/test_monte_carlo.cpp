#include <doctest.h>

#include <cmath>

#include "repeater_rate/analytic.hpp"
#include "repeater_rate/error.hpp"
#include "repeater_rate/monte_carlo.hpp"

using namespace repeater_rate;

namespace {

double z(double observed, double expected, double se) { return std::abs(observed - expected) / se; }

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

template <typename Draw>
Moments sample(int count, Draw&& draw) {
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < count; ++i) {
    const double x = draw(i);
    s += x;
    s2 += x * x;
  }
  const double mean = s / count;
  const double var = (s2 - s * mean) / (count - 1);
  return {mean, std::sqrt(var / count)};
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  StreamRng a(42, 7);
  StreamRng b(42, 7);
  StreamRng c(42, 8);
  StreamRng d(43, 7);
  bool differs_c = false;
  bool differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs_c |= x != c.next();
    differs_d |= x != d.next();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  StreamRng u(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    const double w = u.uniform_open0();
    CHECK((v >= 0.0 && v < 1.0));
    CHECK((w > 0.0 && w <= 1.0));
  }
}

TEST_CASE("simulate_round with p = 1 wins in one step") {
  for (int n = 1; n <= 5; ++n) {
    for (int tau = 0; tau <= 3; ++tau) {
      StreamRng rng(1, 0);
      for (bool ff : {false, true}) {
        const RoundOutcome r = simulate_round(validate_params(1.0, n, tau), rng, ff);
        CHECK(r.success);
        CHECK(r.steps == 1);
      }
    }
  }
}

TEST_CASE("simulate_round, N = 1: always a win, mean length 1/p") {
  const GameParams gp = validate_params(0.5, 1, 0);
  StreamRng rng(5, 0);
  bool all_won = true;
  const Moments m = sample(1'000'000, [&](int) {
    const RoundOutcome r = simulate_round(gp, rng);
    all_won &= r.success;
    return static_cast<double>(r.steps);
  });
  CHECK(all_won);
  CHECK(z(m.mean, 2.0, m.se) < 3.0);
}

TEST_CASE("simulate_round, N = 2, tau = 1: success fraction near 2/3") {
  const GameParams gp = validate_params(0.5, 2, 1);
  StreamRng rng(6, 0);
  const Moments m = sample(1'000'000, [&](int) { return simulate_round(gp, rng).success ? 1.0 : 0.0; });
  CHECK(z(m.mean, 2.0 / 3.0, m.se) < 3.0);
}

TEST_CASE("simulate_game") {
  StreamRng one(3, 0);
  const GameOutcome g = simulate_game(validate_params(1.0, 4, 2), one);
  CHECK(g.total_steps == 1);
  CHECK(g.failed_rounds == 0);

  for (int omega : {0, 2}) {
    const GameParams gp = validate_params(0.5, 2, 1, omega);
    StreamRng rng(11, static_cast<std::uint64_t>(omega));
    const Moments m = sample(1'000'000, [&](int) { return static_cast<double>(simulate_game(gp, rng).total_steps); });
    CHECK(z(m.mean, omega == 0 ? 3.0 : 4.0, m.se) < 3.0);
  }
}

TEST_CASE("simulate_game charges omega per failed round") {
  const GameParams gp = validate_params(0.4, 3, 1, 5);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    StreamRng rng(9, i);
    const GameOutcome g = simulate_game(gp, rng);
    CHECK(g.total_steps == g.round_steps + 5 * g.failed_rounds);
  }
}

TEST_CASE("estimate frozen statistical examples") {
  const SimStats s = estimate(validate_params(0.5, 2, 1), 1'000'000, 42);
  CHECK(s.trials == 1'000'000);
  CHECK(z(s.mean_steps, 3.0, s.std_error_steps()) < 3.0);
  CHECK(z(s.empirical_P, 2.0 / 3.0, s.std_error_empirical_P()) < 3.0);
  CHECK(z(s.mean_failed_rounds, 0.5, s.std_error_failed_rounds()) < 3.0);
  CHECK(s.ci95_half_width == doctest::Approx(1.96 * s.std_error_steps()));

  const SimStats d = estimate(validate_params(1.0, 3, 0), 1000, 1);
  CHECK(d.mean_steps == 1.0);
  CHECK(d.var_steps == 0.0);
  CHECK(d.mean_failed_rounds == 0.0);
  CHECK(d.empirical_P == 1.0);
}

TEST_CASE("estimate rejects trials < 1") {
  for (std::int64_t t : {0, -5}) {
    try {
      estimate(validate_params(0.5, 2, 1), t, 1);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidTrials);
    }
  }
}

TEST_CASE("property: results do not depend on worker count or mode of scheduling") {
  const GameParams gp = validate_params(0.3, 3, 2, 2);
  for (bool ff : {false, true}) {
    SimOptions base;
    base.fast_forward = ff;
    base.workers = 1;
    const SimStats ref = estimate(gp, 20'001, 77, base);
    for (unsigned w : {2U, 3U, 4U, 7U}) {
      SimOptions o = base;
      o.workers = w;
      const SimStats s = estimate(gp, 20'001, 77, o);
      CHECK(s.mean_steps == ref.mean_steps);
      CHECK(s.var_steps == ref.var_steps);
      CHECK(s.mean_failed_rounds == ref.mean_failed_rounds);
      CHECK(s.var_failed_rounds == ref.var_failed_rounds);
      CHECK(s.empirical_P == ref.empirical_P);
      CHECK(s.rounds == ref.rounds);
      CHECK(s.mean_round_steps == ref.mean_round_steps);
      CHECK(s.var_round_steps == ref.var_round_steps);
      CHECK(s.failed_round_histogram == ref.failed_round_histogram);
    }
    const SimStats again = estimate(gp, 20'001, 77, base);
    CHECK(again.mean_steps == ref.mean_steps);
    const SimStats other = estimate(gp, 20'001, 78, base);
    CHECK(other.mean_steps != ref.mean_steps);
  }
}

TEST_CASE("histogram totals and geometric round count") {
  const GameParams gp = validate_params(0.5, 3, 1);
  const SimStats s = estimate(gp, 400'000, 5);
  std::int64_t games = 0;
  std::int64_t failed = 0;
  for (const auto& [k, v] : s.failed_round_histogram) {
    games += v;
    failed += k * v;
  }
  CHECK(games == s.trials);
  CHECK(s.rounds == games + failed);
  const double P = success_probability(gp);
  const double zero = static_cast<double>(s.failed_round_histogram.at(0)) / static_cast<double>(s.trials);
  CHECK(zero == s.empirical_P);
  CHECK(z(s.empirical_P, P, std::sqrt(P * (1 - P) / static_cast<double>(s.trials))) < 4.0);
  CHECK(z(s.mean_failed_rounds, (1 - P) / P, s.std_error_failed_rounds()) < 4.0);
  CHECK(z(s.mean_round_steps, expected_round_length(gp), s.std_error_round_steps()) < 4.0);
}

TEST_CASE("fast_forward_first_part") {
  StreamRng rng(1, 2);
  for (int i = 0; i < 100; ++i) CHECK(fast_forward_first_part(validate_params(1.0, 3, 1), rng) == 0);

  const GameParams gp = validate_params(0.5, 2, 0);
  StreamRng r2(8, 0);
  const Moments m = sample(1'000'000, [&](int) { return static_cast<double>(fast_forward_first_part(gp, r2)); });
  CHECK(z(m.mean, 1.0 / 3.0, m.se) < 3.0);
}

TEST_CASE("fast-forward and stepwise first parts agree") {
  const GameParams gp = validate_params(0.3, 3, 0);
  StreamRng a(21, 0);
  StreamRng b(22, 0);
  const Moments fast = sample(500'000, [&](int) { return static_cast<double>(fast_forward_first_part(gp, a)); });
  const Moments step = sample(500'000, [&](int) { return static_cast<double>(stepwise_first_part(gp, b)); });
  const double se = std::sqrt(fast.se * fast.se + step.se * step.se);
  CHECK(z(fast.mean, step.mean, se) < 4.0);
}

TEST_CASE("fast-forward games agree with stepwise games") {
  const GameParams gp = validate_params(0.3, 4, 2, 1);
  SimOptions ff;
  ff.fast_forward = true;
  const SimStats a = estimate(gp, 300'000, 31);
  const SimStats b = estimate(gp, 300'000, 32, ff);
  const double se = std::hypot(a.std_error_steps(), b.std_error_steps());
  CHECK(z(a.mean_steps, b.mean_steps, se) < 4.0);
  CHECK(z(b.mean_steps, reset_expectation(gp), b.std_error_steps()) < 4.0);
}
