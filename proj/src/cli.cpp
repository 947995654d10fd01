#include "repeater_rate/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "repeater_rate/enumeration.hpp"
#include "repeater_rate/error.hpp"
#include "repeater_rate/format.hpp"
#include "repeater_rate/monte_carlo.hpp"
#include "repeater_rate/params.hpp"
#include "repeater_rate/validation.hpp"

namespace repeater_rate::cli {

namespace {

using nlohmann::json;

constexpr const char* kSweepHeader = "p,N,tau,omega,P,Q,Lambda,K,K_omega,limit,rel_gap";

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not an integer: '" + s + "'");
  return v;
}

int to_int32(const std::string& s) {
  const long long v = to_int(s);
  if (v < INT32_MIN || v > INT32_MAX) throw UsageError("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

json report_json(double p, int n, int tau, int omega, const RateReport& r) {
  return json{{"p", p},          {"N", n},          {"tau", tau},       {"omega", omega},
              {"P", r.success_prob}, {"Q", r.failure_prob}, {"Lambda", r.expected_round_length},
              {"K", r.expected_steps}, {"K_omega", r.expected_steps_reset}, {"limit", r.perfect_limit},
              {"rel_gap", r.rel_gap_to_limit}};
}

void write_csv_row(std::ostream& out, const SweepRow& row) {
  const RateReport& r = row.report;
  out << format_real(row.p) << ',' << row.n << ',' << row.tau << ',' << row.omega << ',' << format_real(r.success_prob)
      << ',' << format_real(r.failure_prob) << ',' << format_real(r.expected_round_length) << ','
      << format_real(r.expected_steps) << ',' << format_real(r.expected_steps_reset) << ','
      << format_real(r.perfect_limit) << ',' << format_real(r.rel_gap_to_limit) << '\n';
}

// Output sink: a file when a path is given, else `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty() || path == "-") {
      out_ = &fallback;
      return;
    }
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw IoError("cannot open '" + path + "' for writing");
    out_ = &file_;
  }

  std::ostream& stream() { return *out_; }

  void finish() {
    out_->flush();
    if (!*out_) throw IoError("write failed for '" + (path_.empty() ? std::string("stdout") : path_) + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

// ---- subcommands ----------------------------------------------------------

struct EvalArgs {
  double p = 0.0;
  long long n = 0;
  long long tau = 0;
  long long omega = 0;
  std::string format = "text";
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const GameParams gp = validate_params(a.p, a.n, a.tau, a.omega);
  const RateReport r = full_report(gp);
  switch (parse_format(a.format, true)) {
    case Format::Text:
      out << "p=" << format_real(gp.p()) << " N=" << gp.n() << " tau=" << gp.tau() << " omega=" << gp.omega() << '\n'
          << "P=" << format_real(r.success_prob) << '\n'
          << "Q=" << format_real(r.failure_prob) << '\n'
          << "Lambda=" << format_real(r.expected_round_length) << '\n'
          << "K=" << format_real(r.expected_steps) << '\n'
          << "K_omega=" << format_real(r.expected_steps_reset) << '\n'
          << "limit=" << format_real(r.perfect_limit) << '\n'
          << "rel_gap=" << format_real(r.rel_gap_to_limit) << '\n';
      break;
    case Format::Csv:
      out << kSweepHeader << '\n';
      write_csv_row(out, {gp.p(), gp.n(), gp.tau(), gp.omega(), r});
      break;
    case Format::Json:
      out << report_json(gp.p(), gp.n(), gp.tau(), gp.omega(), r).dump(2) << '\n';
      break;
  }
  return kOk;
}

struct SweepArgs {
  std::string p;
  std::string n;
  std::string tau;
  long long omega = 0;
  std::string out;
  std::string format = "csv";
  std::string spec_path;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepSpec spec;
  if (!a.spec_path.empty()) {
    std::ifstream in(a.spec_path);
    if (!in) throw IoError("cannot read spec file '" + a.spec_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    spec = sweep_spec_from_json(buf.str());
    if (!a.out.empty()) spec.output_path = a.out;
  } else {
    spec.p_values = parse_real_range(a.p);
    spec.n_values = parse_int_list(a.n);
    spec.tau_values = parse_int_range(a.tau);
    if (a.omega < 0 || a.omega > INT32_MAX) throw Error(ErrorKind::InvalidReset, "omega must be >= 0");
    spec.omega = static_cast<int>(a.omega);
    spec.output_path = a.out;
    spec.format = parse_format(a.format, false);
  }
  check_sweep_spec(spec);
  const std::vector<SweepRow> rows = run_sweep(spec, default_worker_count());
  Sink sink(spec.output_path, out);
  if (spec.format == Format::Json) {
    write_sweep_json(sink.stream(), rows);
  } else {
    write_sweep_csv(sink.stream(), rows);
  }
  sink.finish();
  return kOk;
}

struct SimulateArgs {
  double p = 0.0;
  long long n = 0;
  long long tau = 0;
  long long omega = 0;
  long long trials = 0;
  std::uint64_t seed = 0;
  bool fast_forward = false;
  std::string format = "text";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const GameParams gp = validate_params(a.p, a.n, a.tau, a.omega);
  SimOptions options;
  options.fast_forward = a.fast_forward;
  const SimStats s = estimate(gp, a.trials, a.seed, options);
  const double analytic = reset_expectation(gp);
  const double se = s.std_error_steps();
  const double z = se > 0.0 ? (s.mean_steps - analytic) / se : (s.mean_steps == analytic ? 0.0 : INFINITY);

  if (parse_format(a.format, true) == Format::Json) {
    json hist = json::object();
    for (const auto& [k, v] : s.failed_round_histogram) hist[std::to_string(k)] = v;
    json j{{"p", gp.p()},
           {"N", gp.n()},
           {"tau", gp.tau()},
           {"omega", gp.omega()},
           {"trials", s.trials},
           {"seed", s.seed},
           {"fast_forward", s.fast_forward},
           {"mean_steps", s.mean_steps},
           {"var_steps", s.var_steps},
           {"ci95_half_width", s.ci95_half_width},
           {"mean_failed_rounds", s.mean_failed_rounds},
           {"empirical_P", s.empirical_P},
           {"rounds", s.rounds},
           {"mean_round_steps", s.mean_round_steps},
           {"analytic_K", analytic},
           {"z_score", z},
           {"failed_round_histogram", hist}};
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << "p=" << format_real(gp.p()) << " N=" << gp.n() << " tau=" << gp.tau() << " omega=" << gp.omega() << '\n'
      << "trials=" << s.trials << '\n'
      << "seed=" << s.seed << '\n'
      << "fast_forward=" << (s.fast_forward ? "true" : "false") << '\n'
      << "mean_steps=" << format_real(s.mean_steps) << '\n'
      << "var_steps=" << format_real(s.var_steps) << '\n'
      << "ci95_half_width=" << format_real(s.ci95_half_width) << '\n'
      << "mean_failed_rounds=" << format_real(s.mean_failed_rounds) << '\n'
      << "empirical_P=" << format_real(s.empirical_P) << '\n'
      << "rounds=" << s.rounds << '\n'
      << "mean_round_steps=" << format_real(s.mean_round_steps) << '\n'
      << "analytic_K=" << format_real(analytic) << '\n'
      << "z_score=" << format_real(z) << '\n'
      << "failed_round_histogram=";
  bool first = true;
  for (const auto& [k, v] : s.failed_round_histogram) {
    out << (first ? "" : ",") << k << ':' << v;
    first = false;
  }
  out << '\n';
  return kOk;
}

struct EnumerateArgs {
  double p = 0.0;
  long long n = 0;
  long long tau = 0;
  std::string out;
  std::uint64_t cap = kDefaultEnumerationCap;
};

int cmd_enumerate(const EnumerateArgs& a, std::ostream& out, std::ostream& err) {
  const GameParams gp = validate_params(a.p, a.n, a.tau);
  // Budget check before touching the output file.
  const std::uint64_t predicted = count_trajectories(gp.n(), gp.tau());
  if (predicted > a.cap) {
    throw Error(ErrorKind::BudgetExceeded,
                std::to_string(predicted) + " trajectories exceed the cap of " + std::to_string(a.cap));
  }
  Sink sink(a.out, out);
  const std::uint64_t rows = write_enumeration_csv(sink.stream(), gp, a.cap);
  sink.finish();
  if (!a.out.empty() && a.out != "-") err << "wrote " << rows << " trajectories to " << a.out << '\n';
  return kOk;
}

int cmd_validate(const ValidationOptions& o, std::ostream& out) {
  if (o.max_n < 1 || o.max_tau < 0) throw UsageError("--max-n must be >= 1 and --max-tau >= 0");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be > 0");
  if (o.trials < 0) throw UsageError("--trials must be >= 0");
  const ValidationReport report = run_validation(o);
  print_validation_table(out, report);
  return report.all_passed() ? kOk : kValidationFailed;
}

}  // namespace

Format parse_format(const std::string& name, bool allow_text) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (allow_text && name == "text") return Format::Text;
  throw UsageError("unknown format '" + name + "'");
}

std::vector<double> parse_real_range(const std::string& text) {
  std::vector<double> values;
  if (text.empty()) return values;
  const auto colon = split(text, ':');
  if (colon.size() == 3) {
    const double start = to_real(colon[0]);
    const double stop = to_real(colon[1]);
    const double step = to_real(colon[2]);
    if (!(step > 0.0)) throw UsageError("range step must be > 0 in '" + text + "'");
    const double slack = 1e-9 * step;
    for (long long i = 0;; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v > stop + slack) break;
      values.push_back(v);
      if (i > 10'000'000) throw UsageError("range too long: '" + text + "'");
    }
    return values;
  }
  if (colon.size() != 1) throw UsageError("expected start:stop:step or a comma list, got '" + text + "'");
  for (const std::string& item : split(text, ',')) values.push_back(to_real(item));
  return values;
}

std::vector<int> parse_int_range(const std::string& text) {
  std::vector<int> values;
  if (text.empty()) return values;
  const auto colon = split(text, ':');
  if (colon.size() == 3) {
    const long long start = to_int(colon[0]);
    const long long stop = to_int(colon[1]);
    const long long step = to_int(colon[2]);
    if (step <= 0) throw UsageError("range step must be > 0 in '" + text + "'");
    if (stop - start > 10'000'000LL * step) throw UsageError("range too long: '" + text + "'");
    for (long long v = start; v <= stop; v += step) values.push_back(to_int32(std::to_string(v)));
    return values;
  }
  if (colon.size() != 1) throw UsageError("expected start:stop:step or a comma list, got '" + text + "'");
  return parse_int_list(text);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  if (text.empty()) return values;
  for (const std::string& item : split(text, ',')) values.push_back(to_int32(item));
  return values;
}

SweepSpec sweep_spec_from_json(const std::string& json_text) {
  SweepSpec spec;
  try {
    const json j = json::parse(json_text);
    spec.p_values = j.at("p_values").get<std::vector<double>>();
    spec.n_values = j.at("N_values").get<std::vector<int>>();
    spec.tau_values = j.at("tau_values").get<std::vector<int>>();
    spec.omega = j.value("omega", 0);
    spec.output_path = j.value("output_path", std::string());
    spec.format = parse_format(j.value("format", std::string("csv")), false);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid sweep spec: ") + e.what());
  }
  return spec;
}

void check_sweep_spec(const SweepSpec& spec) {
  if (spec.p_values.empty()) throw UsageError("sweep needs at least one p value");
  if (spec.n_values.empty()) throw UsageError("sweep needs at least one N value");
  if (spec.tau_values.empty()) throw UsageError("sweep needs at least one tau value");
  for (double p : spec.p_values) {
    for (int n : spec.n_values) {
      for (int tau : spec.tau_values) validate_params(p, n, tau, spec.omega);
    }
  }
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers) {
  check_sweep_spec(spec);
  std::vector<SweepRow> rows;
  for (double p : spec.p_values) {
    for (int n : spec.n_values) {
      for (int tau : spec.tau_values) rows.push_back({p, n, tau, spec.omega, {}});
    }
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max(1U, workers));
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < rows.size(); i = next++) {
        SweepRow& row = rows[i];
        row.report = full_report(validate_params(row.p, row.n, row.tau, row.omega));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& row : rows) write_csv_row(out, row);
}

void write_sweep_json(std::ostream& out, const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const SweepRow& row : rows) arr.push_back(report_json(row.p, row.n, row.tau, row.omega, row.report));
  out << arr.dump(2) << '\n';
}

std::vector<SweepRow> parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw UsageError("missing sweep CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw UsageError("sweep CSV row needs 11 fields: '" + line + "'");
    SweepRow row;
    row.p = to_real(f[0]);
    row.n = to_int32(f[1]);
    row.tau = to_int32(f[2]);
    row.omega = to_int32(f[3]);
    row.report.success_prob = to_real(f[4]);
    row.report.failure_prob = to_real(f[5]);
    row.report.expected_round_length = to_real(f[6]);
    row.report.expected_steps = to_real(f[7]);
    row.report.expected_steps_reset = to_real(f[8]);
    row.report.perfect_limit = to_real(f[9]);
    row.report.rel_gap_to_limit = to_real(f[10]);
    rows.push_back(row);
  }
  return rows;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expected waiting times for N probabilistic memories with a finite memory window"};
  app.require_subcommand(1);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Closed-form rates at one parameter point");
  eval_cmd->add_option("--p", eval.p, "Per-trial success probability")->required();
  eval_cmd->add_option("--n", eval.n, "Number of memories")->required();
  eval_cmd->add_option("--tau", eval.tau, "Memory window")->required();
  eval_cmd->add_option("--omega", eval.omega, "Reset cost per failed round");
  eval_cmd->add_option("--format", eval.format, "text, csv or json");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Closed-form rates over a parameter grid");
  sweep_cmd->add_option("--p", sweep.p, "start:stop:step or comma list");
  sweep_cmd->add_option("--n", sweep.n, "comma list");
  sweep_cmd->add_option("--tau", sweep.tau, "start:stop:step or comma list");
  sweep_cmd->add_option("--omega", sweep.omega, "Reset cost per failed round");
  sweep_cmd->add_option("--out", sweep.out, "Output file (default stdout)");
  sweep_cmd->add_option("--format", sweep.format, "csv or json");
  sweep_cmd->add_option("--spec", sweep.spec_path, "JSON sweep specification");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the game");
  sim_cmd->add_option("--p", sim.p, "Per-trial success probability")->required();
  sim_cmd->add_option("--n", sim.n, "Number of memories")->required();
  sim_cmd->add_option("--tau", sim.tau, "Memory window")->required();
  sim_cmd->add_option("--omega", sim.omega, "Reset cost per failed round");
  sim_cmd->add_option("--trials", sim.trials, "Number of games")->required();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
  sim_cmd->add_flag("--fast-forward", sim.fast_forward, "Sample the leading all-fail run in one draw");
  sim_cmd->add_option("--format", sim.format, "text or json");

  EnumerateArgs en;
  auto* en_cmd = app.add_subcommand("enumerate", "Dump every second-part trajectory with its g-mass");
  en_cmd->add_option("--p", en.p, "Per-trial success probability")->required();
  en_cmd->add_option("--n", en.n, "Number of memories")->required();
  en_cmd->add_option("--tau", en.tau, "Memory window")->required();
  en_cmd->add_option("--out", en.out, "Output file (default stdout)");
  en_cmd->add_option("--max-trajectories", en.cap, "Enumeration budget");

  ValidationOptions val;
  long long val_trials = val.trials;
  auto* val_cmd = app.add_subcommand("validate", "Run the cross-engine invariant suite");
  val_cmd->add_option("--max-n", val.max_n, "Largest N on the grid");
  val_cmd->add_option("--max-tau", val.max_tau, "Largest tau on the grid");
  val_cmd->add_option("--tol", val.tol, "Tolerance of the deterministic checks");
  val_cmd->add_option("--trials", val_trials, "Games per simulated grid point (0 skips simulation)");
  val_cmd->add_option("--seed", val.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*en_cmd) return cmd_enumerate(en, out, err);
    if (*val_cmd) {
      val.trials = val_trials;
      return cmd_validate(val, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::NonTermination ? kValidationFailed : kUsage;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("repeater-rate");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace repeater_rate::cli
