#pragma once

#include <cstdint>
#include <map>

#include "repeater_rate/params.hpp"
#include "repeater_rate/rng.hpp"

namespace repeater_rate {

inline constexpr std::int64_t kMaxStepsPerGame = 1'000'000'000;

struct RoundOutcome {
  bool success = false;
  std::int64_t steps = 0;
};

struct GameOutcome {
  std::int64_t total_steps = 0;    // round steps plus omega per failed round
  std::int64_t failed_rounds = 0;
  std::int64_t round_steps = 0;    // round steps only
};

struct SimOptions {
  bool fast_forward = false;  // sample the leading all-zero run in one draw
  unsigned workers = 0;       // 0: default_worker_count()
};

/// Sample statistics over `trials` independent games.
struct SimStats {
  std::int64_t trials = 0;
  double mean_steps = 0.0;
  double var_steps = 0.0;          // unbiased sample variance
  double ci95_half_width = 0.0;    // 1.96 sqrt(var_steps / trials)
  double mean_failed_rounds = 0.0;
  double var_failed_rounds = 0.0;
  double empirical_P = 0.0;        // fraction of games won in their first round
  std::int64_t rounds = 0;
  double mean_round_steps = 0.0;   // over all rounds, omega excluded
  double var_round_steps = 0.0;
  std::map<std::int64_t, std::int64_t> failed_round_histogram;
  std::uint64_t seed = 0;
  bool fast_forward = false;

  double std_error_steps() const;
  double std_error_failed_rounds() const;
  double std_error_empirical_P() const;
  double std_error_round_steps() const;
};

/// Plays one round bit by bit: leading steps with no flip, the first step
/// with at least one flip, then up to tau more steps. Success iff all N
/// bits are set by then.
RoundOutcome simulate_round(const GameParams& params, StreamRng& rng, bool fast_forward = false);

/// Rounds until one succeeds; omega is charged per failed round.
/// Throws Error{NonTermination} past kMaxStepsPerGame.
GameOutcome simulate_game(const GameParams& params, StreamRng& rng, bool fast_forward = false);

/// Length of the leading run of steps in which no bit flips, drawn from
/// its geometric law (escape probability 1 - q^N per step).
std::int64_t fast_forward_first_part(const GameParams& params, StreamRng& rng);

/// The same run length, obtained by simulating each step.
std::int64_t stepwise_first_part(const GameParams& params, StreamRng& rng);

/// Game i uses StreamRng(seed, i); results do not depend on worker count.
/// Throws Error{InvalidTrials} when trials < 1.
SimStats estimate(const GameParams& params, std::int64_t trials, std::uint64_t seed, const SimOptions& options = {});

/// REPEATER_RATE_THREADS when set and positive, else hardware concurrency.
unsigned default_worker_count();

}  // namespace repeater_rate
