#pragma once

// Solutions of the linear problems that bracket the nonlinear dynamics:
//
//  * psi_t = psi_xx + R psi on the line, with tail data x^q e^{-lambda x}
//    (heat-kernel quadrature);
//  * phi_t = phi_yy + (beta - eta/(t+t0)) phi_y on y > 0 with phi(t,0) = 0, the
//    heat equation ahead of a moving Dirichlet boundary, together with its
//    self-similar decomposition.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace kpplab {

/// w0(y) = y^q e^{-lambda y} for y >= x0, constant front_value below x0.
struct TailInitialData {
  double q = 0.0;
  double lambda = 0.5;
  double x0 = 1.0;
  /// Value on (-inf, x0); defaults to the continuous extension x0^q e^{-lambda x0}.
  std::optional<double> front_value;
  /// e^{-lambda y} on the whole line (q and x0 ignored).
  bool pure_exponential = false;

  static TailInitialData exponential(double lambda);

  double front() const;
  double operator()(double y) const;
  /// Throws DomainError on lambda <= 0, x0 < 1, negative front value.
  void validate() const;
};

/// (x - 2 lambda t)^q e^{-lambda (x - c_lambda t)}: leading far-field behaviour of psi.
double psi_tail_asymptotic(double t, double x, double R, const TailInitialData& data);

/// log psi(t, x). The exponential factor is handled by completing the square; the
/// remaining Gaussian expectation of y^q is integrated adaptively.
double log_psi_eval(double t, double x, double R, const TailInitialData& data,
                    double quad_tol = 1e-10);

double psi_eval(double t, double x, double R, const TailInitialData& data,
                double quad_tol = 1e-10);

/// Direct quadrature of e^{Rt} int w0(y) K_t(x - y) dy over [lo, hi] with the
/// integrand built from log w0. Independent of the completed-square route; used
/// as a cross-check.
double heat_kernel_integral(double t, double x, double R,
                            const std::function<double(double)>& log_w0, double lo, double hi,
                            double quad_tol = 1e-12);

struct BoundCheck {
  bool applicable = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = true;
};

/// The four sandwich inequalities for psi with tail data (lower bound (i),
/// upper bounds (ii) and (iii), global bound (iv)).
struct PsiBoundsReport {
  BoundCheck lower;
  BoundCheck upper_near;
  BoundCheck upper_far;
  BoundCheck global;
  bool all_satisfied() const {
    return lower.satisfied && upper_near.satisfied && upper_far.satisfied && global.satisfied;
  }
};

struct PsiBoundParams {
  double delta = 0.5;
  double epsilon = 0.05;
  double C1 = 1.0;
};

PsiBoundsReport psi_bounds_check(double t, double x, double R, const TailInitialData& data,
                                 const PsiBoundParams& params);

/// Smallest C1 making all applicable inequalities hold on the training points,
/// times `safety`. The result is meant to be frozen before an assertion sweep.
double calibrate_psi_bounds(double R, const TailInitialData& data, double delta, double epsilon,
                            std::span<const std::pair<double, double>> training_points,
                            double safety = 1.25);

struct WindowTail {
  /// log of int_{J^c} w0(y) K_t(x - y) dy, J = (x - 2 lb t - delta t, x - 2 lb t + delta t).
  double log_integral = 0.0;
  /// -lb x + lb^2 t - delta^2 t / 8, the bound without its additive constant.
  double log_bound = 0.0;
  double slack() const { return log_bound - log_integral; }
};

WindowTail j_window_tail(double t, double x, double lambda_bar, double delta,
                         const TailInitialData& data);

// ---------------------------------------------------------------------------
// Moving Dirichlet boundary

struct MovingBoundarySpec {
  double beta = 2.5;
  double eta = 0.0;
  double t0 = 100.0;
  /// Samples of phi(0, y) on y_k = k * phi0_dy, compactly supported in (0, inf).
  std::vector<double> phi0;
  double phi0_dy = 0.05;
  /// Start of the asymptotic regime; defaults to 10 * t0 when unset.
  std::optional<double> t1;

  double epsilon() const;
  double onset() const { return t1.value_or(10.0 * t0); }
  /// phi0(y) = y^2 (2 - y)^2 on (0, 2), the default bump used by the tests.
  static std::vector<double> default_bump(double dy);
};

/// Snapshots of phi in the form e^{beta^2 t/4 + beta y/2} phi(t, y) (phi itself
/// underflows long before the asymptotic regime).
struct MovingBoundarySolution {
  MovingBoundarySpec spec;
  double dy = 0.05;
  double y_max = 0.0;
  /// Snapshot times, uniform in tau = log((t + t0) / t0).
  std::vector<double> times;
  /// hat[k][j] = e^{beta^2 t_k/4 + beta y_j/2} phi(t_k, y_j), y_j = j dy.
  std::vector<std::vector<double>> hat;
  /// sup_y e^{beta^2 t/4} phi(t, y) at every snapshot.
  std::vector<double> amplitude;
  /// Least-squares slope of log amplitude against log(t + t0) over [T/2, T].
  double amplitude_exponent = 0.0;
  /// Constant C of the closed-form profile, fitted at the final time.
  double fitted_C = 0.0;
  /// sup_y |h(t, y)| per snapshot.
  std::vector<double> h_sup;

  double y(std::size_t j) const { return static_cast<double>(j) * dy; }
  /// e^{beta^2 t_k / 4} phi(t_k, y_j).
  double scaled(std::size_t k, std::size_t j) const;
  double power_exponent() const { return spec.beta * spec.eta / 2.0 - 1.5; }
  /// log phi(t_k, y) for a snapshot index k (exact scaling, no underflow).
  double log_phi(std::size_t k, std::size_t j) const;
  /// Residual h(t_k, y_j) extracted from the closed-form profile with fitted C.
  double h(std::size_t k, std::size_t j) const;
  /// phi / (t^{p} y e^{-beta y/2 - y^2/(4t) - beta^2 t/4}) at snapshot k, for 0 < y <= sqrt(1+t).
  std::vector<double> shape_ratio(std::size_t k) const;
};

struct PhiSolveOptions {
  std::size_t snapshots = 200;
};

/// Crank-Nicolson solve on [0, Y], Y >= 10 sqrt(T + t0), Dirichlet at both ends.
MovingBoundarySolution phi_solve(const MovingBoundarySpec& spec, double T, double dy, double dt,
                                 const PhiSolveOptions& options = {});

/// `# kpplab-csv v1` header, then `t,phi_max,amp_exponent` rows (phi_max scaled by e^{beta^2 t/4}).
void write_amplitude_csv(const MovingBoundarySolution& solution, std::ostream& out);

/// `# kpplab-csv v1` header, then `t,x,psi` rows.
void write_psi_csv(std::span<const std::pair<double, double>> points, double R,
                   const TailInitialData& data, std::ostream& out);

struct SelfSimilarProjection {
  std::vector<double> tau;
  /// <w, e0> per snapshot.
  std::vector<double> mode;
  /// ||w - <w,e0> e0||_{L^2} per snapshot.
  std::vector<double> remainder;
  /// Least-squares slope of log remainder against tau over [tau_lo, tau_hi].
  double decay_rate(double tau_lo, double tau_hi) const;
};

/// e0(z) = z e^{-z^2/8} / (2 sqrt(pi))^{1/2}.
double principal_mode(double z);

/// v(tau, z) = e^{-(beta eta/2 - 1) tau} e^{beta^2 t/4 + beta y/2} phi(t, y).
double selfsimilar_v(const MovingBoundarySpec& spec, double t, double y, double log_phi);
/// Inverse of selfsimilar_v: returns log phi.
double selfsimilar_log_phi(const MovingBoundarySpec& spec, double t, double y, double v);

SelfSimilarProjection selfsimilar_project(const MovingBoundarySolution& solution);

}  // namespace kpplab
