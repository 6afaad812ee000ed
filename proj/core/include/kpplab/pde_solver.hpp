#pragma once

// Moving-window solver for
//
//   u_t = u_xx + u (r(t, x) - u)
//
// with r = 1 - a 1{x <= X(t)} (shifting environment), r = R (whole line), or
// r = R on the growing domain t > zeta(x) with Dirichlet data on its boundary.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kpplab/asymptotics.hpp"
#include "kpplab/field.hpp"
#include "kpplab/front_analysis.hpp"
#include "kpplab/linear_oracle.hpp"

namespace kpplab {

enum class DomainMode { ShiftingEnvironment, GrowingDomain, WholeLine };

/// Time discretisation.
///  * StrangCompact: exact logistic half steps around a Crank-Nicolson step of a
///    fourth-order compact Laplacian (second order in time).
///  * Imex: backward-Euler diffusion (3-point Laplacian), forward-Euler reaction.
///  * CrankNicolsonNewton: fully implicit trapezoidal rule, Newton iterations.
enum class TimeScheme { StrangCompact, Imex, CrankNicolsonNewton };

enum class TailMode { Linear, LogPatch };

std::string_view to_string(DomainMode mode) noexcept;
std::string_view to_string(TimeScheme scheme) noexcept;
std::string_view to_string(TailMode mode) noexcept;

/// u0 = plateau behind x_front (smoothed over 2 dx), 0 ahead.
struct HeavisideFront {
  double x_front = 0.0;
};

/// Arbitrary samples on x_lo + k dx (dx must match the solver). Zero beyond.
struct ExplicitSamples {
  double x_lo = 0.0;
  std::vector<double> values;
};

using InitialCondition = std::variant<HeavisideFront, TailInitialData, ExplicitSamples>;

/// Sector zeta(x) = x / boundary_speed for x > 0, zeta = 0 for x <= 0. The moving
/// boundary x_b(t) = boundary_speed * t carries Dirichlet data
/// min(B, (x - 2 lambda t)^q e^{-lambda x + (lambda^2 + R) t}).
struct GrowingDomainSpec {
  double lambda = 0.5;
  double q = 0.0;
  double boundary_speed = 3.0;
  /// Data g on x <= 0 (defaults to the plateau B = R).
  std::optional<double> g_front;

  double boundary(double t) const { return boundary_speed * t; }
  double boundary_value(double t, double x, double R) const;
};

struct SolverConfig {
  double dx = 0.05;
  double dt = 0.02;
  TimeScheme scheme = TimeScheme::StrangCompact;
  /// Right margin kappa sqrt(t + 1) ahead of max(X(t), front).
  double window_kappa = 10.0;
  /// Distance kept behind the level set u = 0.01 * plateau.
  double left_margin = 80.0;
  TailMode tail_mode = TailMode::Linear;
  double u_switch = 1e-12;
  /// Damped (backward Euler) start-up steps for the Crank-Nicolson schemes.
  int startup_steps = 4;
  /// Plateau checks on dropped cells are enforced after this time.
  double burn_in = 50.0;
};

struct ObserverConfig {
  /// Absolute levels b; the first drives trace.csv. Empty: half the plateau.
  std::vector<double> levels;
  double trace_cadence = 1.0;
  /// Times at which full snapshots are kept.
  std::vector<double> snapshot_times;
};

struct Scenario {
  EnvironmentSpec env;
  DomainMode mode = DomainMode::ShiftingEnvironment;
  /// Growth rate for WholeLine and GrowingDomain.
  double R = 1.0;
  InitialCondition initial = HeavisideFront{};
  GrowingDomainSpec growing;
  double horizon = 100.0;
  SolverConfig solver;
  ObserverConfig observers;

  /// Plateau value behind the front (1 - a or R).
  double plateau() const;
  /// Growth rate ahead of every front feature (1 or R).
  double rate_ahead() const;
  /// Position of the discontinuity; NaN outside ShiftingEnvironment mode.
  double shift(double t) const;
  /// Levels actually traced (defaults applied).
  std::vector<double> trace_levels() const;
  /// Every violated constraint, empty when valid.
  std::vector<std::string> problems() const;
  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

Field init_field(const Scenario& scenario);

/// One time step of size dt (window unchanged). Start-up damping applies while
/// field.steps < solver.startup_steps, and on every step in GrowingDomain mode.
Field step(const Field& field, const Scenario& scenario, double dt);

struct RunDiagnostics {
  std::int64_t steps = 0;
  std::size_t max_window = 0;
  std::int64_t cells_dropped = 0;
  double max_plateau_deviation = 0.0;
  double wall_seconds = 0.0;
};

struct RunResult {
  Field final_field;
  std::vector<FrontTrace> traces;
  std::vector<Field> snapshots;
  RunDiagnostics diagnostics;

  const FrontTrace& trace() const { return traces.front(); }
};

/// Called after each trace sample; return false to stop early.
using RunObserver = std::function<bool(const Field&)>;

RunResult run(const Scenario& scenario, const RunObserver& observer = {});
/// Same, filling `result` as the run proceeds; on an exception it keeps the
/// traces and snapshots recorded so far.
void run(const Scenario& scenario, RunResult& result, const RunObserver& observer = {});

/// Stateful stepper used by run(); exposed for benchmarks and fine-grained tests.
class Solver {
 public:
  explicit Solver(Scenario scenario);
  /// Continues from an existing field (window and time taken from it).
  Solver(Scenario scenario, Field field);
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  const Field& field() const noexcept;
  const Scenario& scenario() const noexcept;
  /// Advances one step and re-centres the window.
  void advance();
  /// Advances the field without touching the window.
  void step_only(double dt);
  /// Re-centres the window according to the window policy.
  void recentre();
  const RunDiagnostics& diagnostics() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kpplab
