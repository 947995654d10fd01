#include "repeater_rate/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "repeater_rate/error.hpp"

namespace repeater_rate {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::InvalidCount: return "InvalidCount";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::InvalidReset: return "InvalidReset";
    case ErrorKind::InvalidTrials: return "InvalidTrials";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateCase: return "DegenerateCase";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NonTermination: return "NonTermination";
    case ErrorKind::NoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

namespace {
constexpr std::int64_t kIntMax = std::numeric_limits<int>::max();
}

GameParams validate_params(double p, std::int64_t n, std::int64_t tau, std::int64_t omega) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "p must lie in (0, 1], got " + std::to_string(p));
  }
  if (n < 1 || n > kIntMax) {
    throw Error(ErrorKind::InvalidCount, "N must be >= 1, got " + std::to_string(n));
  }
  if (tau < 0 || tau > kIntMax) {
    throw Error(ErrorKind::InvalidWindow, "tau must be >= 0, got " + std::to_string(tau));
  }
  if (omega < 0 || omega > kIntMax) {
    throw Error(ErrorKind::InvalidReset, "omega must be >= 0, got " + std::to_string(omega));
  }
  return GameParams(p, static_cast<int>(n), static_cast<int>(tau), static_cast<int>(omega));
}

GameParams GameParams::with_omega(std::int64_t omega) const { return validate_params(p_, n_, tau_, omega); }

GameParams GameParams::with_tau(std::int64_t tau) const { return validate_params(p_, n_, tau, omega_); }

}  // namespace repeater_rate
