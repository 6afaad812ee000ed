#pragma once

// Front extraction and regression: level sets, logarithmic-delay fits, amplitude
// laws at the discontinuity, and distances to traveling waves or linear oracles.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kpplab/field.hpp"

namespace kpplab {

class WaveProfile;

/// Time series of one level set together with u(t, X(t)).
struct FrontTrace {
  double level = 0.5;
  std::vector<double> times;
  std::vector<double> xi;
  std::vector<double> u_at_shift;
  std::vector<double> shift;

  std::size_t size() const noexcept { return times.size(); }
  void push(double t, double xi_b, double u_x, double x_shift);
  /// Throws DataError unless times are strictly increasing and columns agree.
  void validate() const;
};

inline constexpr double kNoCrossing = -std::numeric_limits<double>::infinity();

/// Rightmost position where samples on x_i = x_lo + i dx cross `b` from above,
/// linearly interpolated. Returns kNoCrossing if no sample reaches b.
double level_set(std::span<const double> u, double x_lo, double dx, double b);
double level_set(const Field& field, double b);

enum class FitMode { SpeedFixed, SpeedFree };

struct FitOptions {
  FitMode mode = FitMode::SpeedFixed;
  /// Speed used in SpeedFixed mode.
  double c = 0.0;
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  /// Adds a log log t regressor (critical pulling with q = -2).
  bool log_log = false;
  /// Design matrices with a larger 2-norm condition number are rejected.
  double max_condition = 1e12;
};

struct FitResult {
  FitMode mode = FitMode::SpeedFixed;
  double c_hat = 0.0;
  double theta_hat = 0.0;
  double C_hat = 0.0;
  double log_log_hat = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  double residual_rms = 0.0;
  double condition = 0.0;
};

/// Least squares of xi(t) on {t, log t, 1} (SpeedFree) or of xi(t) - c t on
/// {log t, 1} (SpeedFixed). Columns are scaled before the QR solve.
FitResult fit_delay(const FrontTrace& trace, const FitOptions& options);
FitResult fit_delay(std::span<const double> times, std::span<const double> xi,
                    const FitOptions& options);

/// Default window: the last dyadic span [T/4, T] of the trace.
FitOptions default_fit_window(const FrontTrace& trace, double c);

struct AmplitudeFit {
  /// Coefficient of log t (target -3/2 + beta eta / 2).
  double power_exponent = 0.0;
  /// Coefficient of t (target -(beta^2/4 - 1)).
  double exponential_rate = 0.0;
  double constant = 0.0;
  double residual_rms = 0.0;
  std::size_t samples = 0;
};

/// Fits log u(t, X(t)) = p log t + r t + c over trace samples with t in [t_lo, t_hi].
AmplitudeFit amplitude_fit(const FrontTrace& trace, double t_lo, double t_hi);
AmplitudeFit amplitude_fit(std::span<const double> times, std::span<const double> values);

/// sup over the window of |u - Phi(x - s)| with s chosen so both cross b_align
/// at the same point.
double profile_distance(const Field& field, const WaveProfile& wave, double b_align);

struct RatioStats {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  std::size_t count = 0;
  std::size_t skipped = 0;
};

/// Points x = m + z, z in [z_lo, z_hi], at which u / psi is sampled.
struct OracleRegion {
  double m = 0.0;
  double z_lo = 0.0;
  double z_hi = std::numeric_limits<double>::infinity();
};

/// u / psi over the region, psi evaluated by `psi(t, x)`. Points where psi is
/// below `psi_floor` (or u underflowed) are skipped and counted.
RatioStats ratio_to_oracle(const Field& field, const std::function<double(double, double)>& psi,
                           const OracleRegion& region, double psi_floor = 1e-280);

/// Flat key=value text: c_hat, theta_hat, theta_star, rel_err, residual_rms, window_lo, window_hi.
std::string format_fit_report(const FitResult& fit, double theta_star);

}  // namespace kpplab
