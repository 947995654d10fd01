#include "repeater_rate/trajectory.hpp"

#include <numeric>
#include <string>

#include "repeater_rate/error.hpp"

namespace repeater_rate {

Trajectory::Trajectory(std::vector<int> counts, int n) : counts_(std::move(counts)), n_(n), total_(0) {
  if (counts_.empty()) throw Error(ErrorKind::DomainError, "trajectory needs at least one step");
  if (counts_[0] < 1) throw Error(ErrorKind::DomainError, "first step must flip at least one bit");
  for (int c : counts_) {
    if (c < 0) throw Error(ErrorKind::DomainError, "negative flip count");
    total_ += c;
    if (total_ > n_) {
      throw Error(ErrorKind::DomainError, "flip counts exceed N=" + std::to_string(n_));
    }
  }
}

int Trajectory::remaining_before(int l) const noexcept {
  return n_ - std::accumulate(counts_.begin(), counts_.begin() + l, 0);
}

int trajectory_sigma(const Trajectory& t) noexcept {
  auto counts = t.counts();
  for (int l = static_cast<int>(counts.size()) - 1; l > 0; --l) {
    if (counts[l] > 0) return l;
  }
  return 0;
}

bool trajectory_is_success(const Trajectory& t, const GameParams& params) noexcept {
  return t.total() == params.n();
}

}  // namespace repeater_rate
