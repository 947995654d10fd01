#pragma once

#include <span>
#include <vector>

#include "repeater_rate/params.hpp"

namespace repeater_rate {

/// Flip counts per step of the second part of a round: counts()[l] bits
/// switched at step l after (and including) the first successful step.
/// Dense storage of length tau + 1.
class Trajectory {
 public:
  /// Throws Error{DomainError} unless counts[0] >= 1 and sum(counts) <= n.
  Trajectory(std::vector<int> counts, int n);

  std::span<const int> counts() const noexcept { return counts_; }
  int window() const noexcept { return static_cast<int>(counts_.size()) - 1; }
  int memories() const noexcept { return n_; }
  int total() const noexcept { return total_; }

  /// Bits still unflipped before step l: N - sum_{j<l} counts[j].
  int remaining_before(int l) const noexcept;
  /// Bits still unflipped after step l.
  int remaining_after(int l) const noexcept { return remaining_before(l) - counts_[l]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<int> counts_;
  int n_;
  int total_;
};

/// Largest step index with a nonzero flip count.
int trajectory_sigma(const Trajectory& t) noexcept;

bool trajectory_is_success(const Trajectory& t, const GameParams& params) noexcept;

}  // namespace repeater_rate
