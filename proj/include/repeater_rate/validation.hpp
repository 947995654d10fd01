#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace repeater_rate {

struct ValidationOptions {
  int max_n = 4;
  int max_tau = 4;
  double tol = 1e-10;
  std::int64_t trials = 200'000;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  double z_limit = 4.0;
};

/// One named invariant evaluated over a grid. `worst` is the largest error
/// seen (absolute or relative per check, or |z| for statistical checks).
struct CheckResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;
  double limit = 0.0;
  std::string first_failure;

  bool passed() const noexcept { return failures == 0 && cases > 0; }
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const noexcept;
};

/// Cross-checks closed forms, exhaustive enumeration and simulation on
/// N in [1, max_n], tau in [0, max_tau].
ValidationReport run_validation(const ValidationOptions& options);

void print_validation_table(std::ostream& out, const ValidationReport& report);

}  // namespace repeater_rate
