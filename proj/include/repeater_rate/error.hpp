#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repeater_rate {

enum class ErrorKind {
  InvalidProbability,
  InvalidCount,
  InvalidWindow,
  InvalidReset,
  InvalidTrials,
  DomainError,
  DegenerateCase,
  BudgetExceeded,
  NonTermination,
  NoConvergence,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace repeater_rate
