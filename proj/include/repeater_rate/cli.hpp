#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "repeater_rate/analytic.hpp"

namespace repeater_rate::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kUsage = 2,
  kIo = 3,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Text, Csv, Json };

Format parse_format(const std::string& name, bool allow_text);

struct SweepSpec {
  std::vector<double> p_values;
  std::vector<int> n_values;
  std::vector<int> tau_values;
  int omega = 0;
  std::string output_path;  // empty or "-": stdout
  Format format = Format::Csv;
};

struct SweepRow {
  double p = 0.0;
  int n = 0;
  int tau = 0;
  int omega = 0;
  RateReport report;
};

/// `start:stop:step` (inclusive of stop up to rounding) or a comma list.
std::vector<double> parse_real_range(const std::string& text);
std::vector<int> parse_int_range(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

/// Reads a SweepSpec from JSON with keys p_values, N_values, tau_values,
/// omega, output_path, format.
SweepSpec sweep_spec_from_json(const std::string& json_text);

/// Throws UsageError on an empty list and Error on invalid parameters.
void check_sweep_spec(const SweepSpec& spec);

/// Rows ordered p-major, then N, then tau; grid points evaluated in parallel.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(std::istream& in);

/// Entry point behind the executable; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace repeater_rate::cli
