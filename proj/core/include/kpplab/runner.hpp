#pragma once

// Config-driven experiments: parse, run, sweep, analyze.
//
// Config grammar (one file, `#` or `;` comments, blank lines ignored):
//
//   [section]
//   key = value
//
// Sections and keys are listed in config_keys(). Lists are comma separated.
// Unknown sections or keys are validation errors.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kpplab/front_analysis.hpp"
#include "kpplab/pde_solver.hpp"

namespace kpplab {

struct AnalysisConfig {
  FitMode fit_mode = FitMode::SpeedFixed;
  /// Fit window; defaults to [T/4, T].
  std::optional<double> fit_lo;
  std::optional<double> fit_hi;
  bool log_log = false;
  /// Amplitude fit window for u(t, X(t)); skipped when unset.
  std::optional<double> amplitude_lo;
  std::optional<double> amplitude_hi;
  /// Relative tolerance on theta_hat; pass/fail is reported only when set.
  std::optional<double> theta_tolerance;
  /// Report the sup distance to the selected traveling wave at t = T.
  bool profile = false;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  /// Relative subdirectory between the root and the run name.
  std::filesystem::path group;
  bool snapshots = true;
};

struct RunConfig {
  std::string name = "run";
  Scenario scenario;
  AnalysisConfig analysis;
  OutputConfig output;
  /// [sweep] grid over a, beta, eta, dx, T.
  std::map<std::string, std::vector<double>> grid;
};

/// section -> allowed keys.
const std::map<std::string, std::vector<std::string>>& config_keys();

/// Parses and validates; throws ValidationError listing every problem.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config in the input grammar (re-running it reproduces the run).
std::string format_config(const RunConfig& config);

struct RunSummary {
  std::string name;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  FrontPrediction prediction;
  bool has_prediction = false;
  std::optional<FitResult> fit;
  std::optional<AmplitudeFit> amplitude;
  std::optional<double> profile_distance;
  std::optional<bool> passed;
  double wall_seconds = 0.0;
};

/// ($KPPLAB_OUT if set, otherwise config.output.dir) / config.output.group.
std::filesystem::path output_root(const RunConfig& config);

/// Writes <root>/<name>/{manifest.txt, trace.csv, snaps/, report.txt}. Runtime
/// errors are caught: partial outputs are kept and a FAILED marker is written.
RunSummary run_command(const RunConfig& config);
/// Same, also handing back the in-memory result (final field, traces, snapshots).
RunSummary run_command(const RunConfig& config, RunResult& result);

/// One run per grid point (cartesian product), `jobs` at a time (0: hardware
/// concurrency). Writes <root>/<name>/aggregate.csv. ValidationError on an empty grid.
std::vector<RunSummary> sweep_command(const RunConfig& config, unsigned jobs = 0);

/// Grid points of a sweep, each a complete config named <name>/<point>.
std::vector<RunConfig> expand_grid(const RunConfig& config);

void write_trace_csv(const FrontTrace& trace, std::ostream& out);
FrontTrace read_trace_csv(std::istream& in);
void write_snapshot_csv(const Field& field, std::ostream& out);
/// `snap_t<time>.csv` with the time at 10 significant digits.
std::string snapshot_name(double t);

enum class Theorem { GrowingDomain, Pulling, Critical, NoPulling };
/// "1.4", "1.5", "1.6", "1.7".
Theorem parse_theorem(const std::string& label);

struct AnalyzeRequest {
  Theorem theorem = Theorem::Pulling;
  EnvironmentSpec env;
  /// Growing domain (Theorem 1.4) parameters.
  double lambda = 0.5;
  double q = 0.0;
  double R = 1.0;
  AnalysisConfig analysis;
};

/// Fits the trace against the theorem's prediction and returns report.txt text.
std::string analyze_trace(const FrontTrace& trace, const AnalyzeRequest& request);

}  // namespace kpplab
