#include "repeater_rate/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "binomial.hpp"
#include "repeater_rate/error.hpp"

namespace repeater_rate {

namespace {

// u < threshold for a uniform 64-bit u has probability exactly p whenever
// p * 2^64 is an integer, i.e. for every double p >= 2^-11.
struct BitFlipper {
  explicit BitFlipper(double p)
      : always(p >= 1.0), threshold(always ? 0 : static_cast<std::uint64_t>(std::ldexp(p, 64))) {}

  int flips(int remaining, StreamRng& rng) const noexcept {
    if (always) return remaining;
    int c = 0;
    for (int i = 0; i < remaining; ++i) c += rng.next() < threshold ? 1 : 0;
    return c;
  }

  bool always;
  std::uint64_t threshold;
};

// Leading no-flip run and the flip count of the step that ends it,
// tabulated once per parameter point.
class FirstPartSampler {
 public:
  explicit FirstPartSampler(const GameParams& params) : n_(params.n()) {
    if (params.p() >= 1.0) return;
    log_stay_ = params.n() * std::log(params.q());
    // Binomial(N, p) conditioned on >= 1 flip.
    const double escape = -std::expm1(log_stay_);
    double acc = 0.0;
    for (int c = 1; c < n_; ++c) {
      acc += detail::binomial(n_, c) * std::pow(params.p(), c) * std::pow(params.q(), n_ - c) / escape;
      cdf_.push_back(acc);
    }
  }

  std::int64_t leading_run(StreamRng& rng) const {
    if (log_stay_ == 0.0) return 0;
    // P(k >= x) = q^(N x)
    const double k = std::floor(std::log(rng.uniform_open0()) / log_stay_);
    return k >= static_cast<double>(kMaxStepsPerGame) ? kMaxStepsPerGame + 1 : static_cast<std::int64_t>(k);
  }

  int first_flips(StreamRng& rng) const {
    if (log_stay_ == 0.0) return n_;
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cdf_.size(); ++i) {
      if (u < cdf_[i]) return static_cast<int>(i) + 1;
    }
    return n_;
  }

 private:
  int n_;
  double log_stay_ = 0.0;
  std::vector<double> cdf_;  // cdf_[c-1] = P(flips <= c | flips >= 1)
};

void check_budget(std::int64_t steps) {
  if (steps > kMaxStepsPerGame) {
    throw Error(ErrorKind::NonTermination, "game exceeded " + std::to_string(kMaxStepsPerGame) + " steps");
  }
}

// `sampler` non-null selects fast-forward mode.
RoundOutcome play_round(const GameParams& params, const BitFlipper& flipper, StreamRng& rng,
                        const FirstPartSampler* sampler) {
  const int n = params.n();
  std::int64_t steps = 0;
  int flipped = 0;
  if (sampler != nullptr) {
    steps = sampler->leading_run(rng);
    check_budget(steps);
    flipped = sampler->first_flips(rng);
  } else {
    while ((flipped = flipper.flips(n, rng)) == 0) check_budget(++steps);
  }
  ++steps;  // the first step with a flip
  int remaining = n - flipped;
  for (int l = 1; l <= params.tau() && remaining > 0; ++l) {
    remaining -= flipper.flips(remaining, rng);
    ++steps;
  }
  return {remaining == 0, steps};
}

template <typename OnRound>
GameOutcome play_game(const GameParams& params, const BitFlipper& flipper, StreamRng& rng,
                      const FirstPartSampler* sampler, OnRound&& on_round) {
  GameOutcome g;
  while (true) {
    const RoundOutcome r = play_round(params, flipper, rng, sampler);
    on_round(r);
    g.round_steps += r.steps;
    g.total_steps += r.steps;
    if (r.success) return g;
    ++g.failed_rounds;
    g.total_steps += params.omega();
    check_budget(g.total_steps);
  }
}

__extension__ using u128 = unsigned __int128;

// Integer sums only, so merging partial results is exact and order-free.
struct Accumulator {
  std::uint64_t games = 0;
  std::uint64_t steps = 0;
  u128 steps_sq = 0;
  std::uint64_t failed = 0;
  u128 failed_sq = 0;
  std::uint64_t first_round_wins = 0;
  std::uint64_t round_steps = 0;
  u128 round_steps_sq = 0;  // sum over rounds of steps^2
  std::map<std::int64_t, std::int64_t> histogram;

  void merge(const Accumulator& o) {
    games += o.games;
    steps += o.steps;
    steps_sq += o.steps_sq;
    failed += o.failed;
    failed_sq += o.failed_sq;
    first_round_wins += o.first_round_wins;
    round_steps += o.round_steps;
    round_steps_sq += o.round_steps_sq;
    for (const auto& [k, v] : o.histogram) histogram[k] += v;
  }
};

void run_range(const GameParams& params, std::uint64_t seed, std::int64_t begin, std::int64_t end,
               bool fast_forward, Accumulator& acc) {
  const BitFlipper flipper(params.p());
  const FirstPartSampler sampler(params);
  auto on_round = [&acc](const RoundOutcome& r) {
    const auto s = static_cast<std::uint64_t>(r.steps);
    acc.round_steps += s;
    acc.round_steps_sq += static_cast<u128>(s) * s;
  };
  for (std::int64_t i = begin; i < end; ++i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i));
    const GameOutcome g = play_game(params, flipper, rng, fast_forward ? &sampler : nullptr, on_round);
    const auto t = static_cast<std::uint64_t>(g.total_steps);
    const auto f = static_cast<std::uint64_t>(g.failed_rounds);
    ++acc.games;
    acc.steps += t;
    acc.steps_sq += static_cast<u128>(t) * t;
    acc.failed += f;
    acc.failed_sq += static_cast<u128>(f) * f;
    if (f == 0) ++acc.first_round_wins;
    ++acc.histogram[g.failed_rounds];
  }
}

long double as_ld(u128 x) { return static_cast<long double>(x); }

// Unbiased variance from integer sums.
double sample_variance(std::uint64_t count, std::uint64_t sum, u128 sum_sq) {
  if (count < 2) return 0.0;
  const long double n = static_cast<long double>(count);
  const long double s = static_cast<long double>(sum);
  const long double v = (as_ld(sum_sq) - s * s / n) / (n - 1.0L);
  return static_cast<double>(std::max(v, 0.0L));
}

}  // namespace

double SimStats::std_error_steps() const { return std::sqrt(var_steps / static_cast<double>(trials)); }

double SimStats::std_error_failed_rounds() const {
  return std::sqrt(var_failed_rounds / static_cast<double>(trials));
}

double SimStats::std_error_empirical_P() const {
  return std::sqrt(empirical_P * (1.0 - empirical_P) / static_cast<double>(trials));
}

double SimStats::std_error_round_steps() const {
  return std::sqrt(var_round_steps / static_cast<double>(rounds));
}

RoundOutcome simulate_round(const GameParams& params, StreamRng& rng, bool fast_forward) {
  const FirstPartSampler sampler(params);
  return play_round(params, BitFlipper(params.p()), rng, fast_forward ? &sampler : nullptr);
}

GameOutcome simulate_game(const GameParams& params, StreamRng& rng, bool fast_forward) {
  const FirstPartSampler sampler(params);
  return play_game(params, BitFlipper(params.p()), rng, fast_forward ? &sampler : nullptr, [](const RoundOutcome&) {});
}

std::int64_t fast_forward_first_part(const GameParams& params, StreamRng& rng) {
  return FirstPartSampler(params).leading_run(rng);
}

std::int64_t stepwise_first_part(const GameParams& params, StreamRng& rng) {
  const BitFlipper flipper(params.p());
  std::int64_t k = 0;
  while (flipper.flips(params.n(), rng) == 0) check_budget(++k);
  return k;
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("REPEATER_RATE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

SimStats estimate(const GameParams& params, std::int64_t trials, std::uint64_t seed, const SimOptions& options) {
  if (trials < 1) throw Error(ErrorKind::InvalidTrials, "trials must be >= 1, got " + std::to_string(trials));

  unsigned workers = options.workers == 0 ? default_worker_count() : options.workers;
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, trials));
  std::vector<Accumulator> partial(workers);
  const std::int64_t chunk = (trials + workers - 1) / workers;

  if (workers == 1) {
    run_range(params, seed, 0, trials, options.fast_forward, partial[0]);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t begin = std::min(trials, w * chunk);
      const std::int64_t end = std::min(trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(params, seed, begin, end, options.fast_forward, partial[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  Accumulator total;
  for (const auto& p : partial) total.merge(p);

  const auto n = static_cast<double>(total.games);
  const std::uint64_t rounds = total.games + total.failed;
  SimStats s;
  s.trials = trials;
  s.seed = seed;
  s.fast_forward = options.fast_forward;
  s.mean_steps = static_cast<double>(total.steps) / n;
  s.var_steps = sample_variance(total.games, total.steps, total.steps_sq);
  s.ci95_half_width = 1.96 * std::sqrt(s.var_steps / n);
  s.mean_failed_rounds = static_cast<double>(total.failed) / n;
  s.var_failed_rounds = sample_variance(total.games, total.failed, total.failed_sq);
  s.empirical_P = static_cast<double>(total.first_round_wins) / n;
  s.rounds = static_cast<std::int64_t>(rounds);
  s.mean_round_steps = static_cast<double>(total.round_steps) / static_cast<double>(rounds);
  s.var_round_steps = sample_variance(rounds, total.round_steps, total.round_steps_sq);
  s.failed_round_histogram = std::move(total.histogram);
  return s;
}

}  // namespace repeater_rate
