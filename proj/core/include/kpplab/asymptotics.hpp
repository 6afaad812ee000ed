#pragma once

// Closed-form spreading speeds, decay exponents and logarithmic delays for the
// Fisher-KPP equation
//
//   u_t = u_xx + u (1 - a 1{x <= X(t)} - u),   X(t) = beta t - eta log(t + 1).
//
// Everything in this header is pure and reentrant.

#include <functional>
#include <string_view>

namespace kpplab {

/// Shifting environment (a, beta, eta). Growth rate is R+ = 1 ahead of X(t) and
/// R- = 1 - a behind it.
struct EnvironmentSpec {
  double a = 0.0;
  double beta = 0.0;
  double eta = 0.0;

  double r_plus() const noexcept { return 1.0; }
  double r_minus() const noexcept { return 1.0 - a; }
  /// Position of the discontinuity at time t >= 0.
  double shift(double t) const;
};

enum class RegimeLabel { Subcritical, SupercriticalPulling, CriticalPulling, NoPulling };

std::string_view to_string(RegimeLabel label) noexcept;

struct Regime {
  RegimeLabel label = RegimeLabel::Subcritical;
  double boundary_tolerance = 0.0;
};

inline constexpr double kDefaultRegimeTolerance = 1e-9;

/// 2 (sqrt(a) + sqrt(1 - a)): the beta at which nonlocal pulling stops.
double pulling_threshold(double a);

/// Throws DomainError unless 0 < a < 1 and tol >= 0; throws UnsupportedRegime for
/// beta = 2 (within tol) with eta >= 1/2.
Regime classify_regime(const EnvironmentSpec& env, double tol = kDefaultRegimeTolerance);

/// lambda_* = beta/2 - sqrt(a). RegimeError outside supercritical pulling.
double effective_exponent(const EnvironmentSpec& env, double tol = kDefaultRegimeTolerance);

/// Asymptotic speed c_*. Accepts a = 0 as the homogeneous KPP limit (c_* = 2).
double spreading_speed(const EnvironmentSpec& env, double tol = kDefaultRegimeTolerance);

/// c_lambda = lambda + R / lambda.
double wave_speed(double lambda, double R);

/// Coefficients of log t (and, in the critical q = -2 case, of log log t) in the
/// front position.
struct LogCoefficient {
  double log_t = 0.0;
  double log_log_t = 0.0;
  bool has_log_log = false;
};

/// theta_* = lim (xi_b(t) - c_* t) / log t. Accepts a = 0 as the classical case.
LogCoefficient log_coefficient(const EnvironmentSpec& env, double tol = kDefaultRegimeTolerance);

/// m_{lambda,q}(t) = c_lambda t + (q / lambda) log((c_lambda - 2 lambda) t), for
/// 0 < lambda < sqrt(R) and t > 1 / (c_lambda - 2 lambda).
double delay_m(double lambda, double R, double q, double t);

/// Three-branch critical delay m~_q(t) with c_min = 2 sqrt(R), lambda_min = sqrt(R).
double delay_m_tilde(double R, double q, double t);

/// Log coefficient of m_{lambda,q} (q / lambda) or, for lambda = sqrt(R), of m~_q.
LogCoefficient tail_log_coefficient(double lambda, double R, double q);

/// Everything the theory says about the front for one environment.
struct FrontPrediction {
  Regime regime;
  double c_star = 0.0;
  /// Decay exponent selected by the front: lambda_*, lambda_min, or 1 (beta < 2).
  double lambda_eff = 0.0;
  /// Plateau value behind the front (1 - a, or 1 for a = 0).
  double plateau = 1.0;
  /// Tail power q; -3 stands for compactly supported (Bramson) behaviour.
  double q_eff = 0.0;
  LogCoefficient theta;
  /// Predicted front location, exact up to an additive O(1) term. Defined for t >= 1.
  std::function<double(double)> delay;
};

FrontPrediction predict_front(const EnvironmentSpec& env, double tol = kDefaultRegimeTolerance);

/// Predicted level-set position at time t >= 1 (up to an additive O(1) constant).
double predicted_front(const EnvironmentSpec& env, double t, double tol = kDefaultRegimeTolerance);

}  // namespace kpplab
