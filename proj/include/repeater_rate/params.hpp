#pragma once

#include <cstdint>

namespace repeater_rate {

/// Parameters of one game: per-trial success probability p, N memories,
/// window tau (trials after the first success) and reset cost omega.
///
/// Only obtainable through validate_params, so every instance satisfies
/// 0 < p <= 1, q == 1 - p, N >= 1, tau >= 0, omega >= 0.
class GameParams {
 public:
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  int n() const noexcept { return n_; }
  int tau() const noexcept { return tau_; }
  int omega() const noexcept { return omega_; }

  GameParams with_omega(std::int64_t omega) const;
  GameParams with_tau(std::int64_t tau) const;

  friend bool operator==(const GameParams&, const GameParams&) = default;

 private:
  friend GameParams validate_params(double p, std::int64_t n, std::int64_t tau, std::int64_t omega);
  GameParams(double p, int n, int tau, int omega) : p_(p), q_(1.0 - p), n_(n), tau_(tau), omega_(omega) {}

  double p_;
  double q_;
  int n_;
  int tau_;
  int omega_;
};

/// Throws Error{InvalidProbability | InvalidCount | InvalidWindow | InvalidReset}.
GameParams validate_params(double p, std::int64_t n, std::int64_t tau, std::int64_t omega = 0);

}  // namespace repeater_rate
