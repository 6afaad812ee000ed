#include "kpplab/front_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "kpplab/errors.hpp"
#include "kpplab/traveling_wave.hpp"

namespace kpplab {
namespace {

struct Lsq {
  Eigen::VectorXd coef;
  double residual_rms = 0.0;
  double condition = 0.0;
};

Lsq solve_scaled(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double max_condition) {
  if (M.rows() <= M.cols()) {
    throw FitError("regression needs more samples (" + std::to_string(M.rows()) + ") than unknowns (" +
                   std::to_string(M.cols()) + ")");
  }
  Eigen::VectorXd scale = M.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  }
  Eigen::MatrixXd S = M;
  for (Eigen::Index j = 0; j < S.cols(); ++j) S.col(j) /= scale(j);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "design matrix is degenerate (condition number " << cond << "); widen the fit window";
    throw FitError(msg.str());
  }
  Lsq out;
  out.condition = cond;
  out.coef = S.colPivHouseholderQr().solve(y).cwiseQuotient(scale);
  const Eigen::VectorXd r = M * out.coef - y;
  out.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  return out;
}

}  // namespace

void FrontTrace::push(double t, double xi_b, double u_x, double x_shift) {
  times.push_back(t);
  xi.push_back(xi_b);
  u_at_shift.push_back(u_x);
  shift.push_back(x_shift);
}

void FrontTrace::validate() const {
  const std::size_t n = times.size();
  if (xi.size() != n || u_at_shift.size() != n || shift.size() != n) {
    throw DataError("front trace columns have different lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(times[i])) throw DataError("front trace has a non-finite time");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DataError("front trace times must be strictly increasing");
    }
  }
}

double level_set(std::span<const double> u, double x_lo, double dx, double b) {
  for (double v : u) {
    if (!std::isfinite(v)) throw DataError("level_set: field holds non-finite values");
  }
  const std::size_t n = u.size();
  for (std::size_t i = n; i-- > 0;) {
    if (u[i] >= b) {
      if (i + 1 == n) return x_lo + dx * static_cast<double>(i);
      const double w = (u[i] - b) / (u[i] - u[i + 1]);
      return x_lo + dx * (static_cast<double>(i) + w);
    }
  }
  return kNoCrossing;
}

double level_set(const Field& field, double b) {
  return level_set(field.values(), field.x_lo(), field.dx, b);
}

FitResult fit_delay(std::span<const double> times, std::span<const double> xi,
                    const FitOptions& options) {
  if (times.size() != xi.size()) throw DataError("fit_delay: times and xi differ in length");
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < options.t_lo || t > options.t_hi) continue;
    if (!std::isfinite(xi[i])) throw DataError("fit_delay: non-finite front position in the window");
    if (!(t > 0.0) || (options.log_log && !(t > std::exp(1.0)))) {
      throw FitError("fit_delay: window must start at t > 0 (t > e with log log t)");
    }
    ts.push_back(t);
    ys.push_back(xi[i]);
  }
  const bool free = options.mode == FitMode::SpeedFree;
  const Eigen::Index cols = (free ? 3 : 2) + (options.log_log ? 1 : 0);
  const Eigen::Index n = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd M(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ts[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    if (free) M(i, j++) = t;
    M(i, j++) = std::log(t);
    M(i, j++) = 1.0;
    if (options.log_log) M(i, j++) = std::log(std::log(t));
    y(i) = ys[static_cast<std::size_t>(i)] - (free ? 0.0 : options.c * t);
  }
  const Lsq lsq = solve_scaled(M, y, options.max_condition);
  FitResult r;
  r.mode = options.mode;
  Eigen::Index j = 0;
  r.c_hat = free ? lsq.coef(j++) : options.c;
  r.theta_hat = lsq.coef(j++);
  r.C_hat = lsq.coef(j++);
  if (options.log_log) r.log_log_hat = lsq.coef(j++);
  r.t_lo = ts.front();
  r.t_hi = ts.back();
  r.samples = ts.size();
  r.residual_rms = lsq.residual_rms;
  r.condition = lsq.condition;
  return r;
}

FitResult fit_delay(const FrontTrace& trace, const FitOptions& options) {
  trace.validate();
  return fit_delay(trace.times, trace.xi, options);
}

FitOptions default_fit_window(const FrontTrace& trace, double c) {
  if (trace.times.empty()) throw DataError("default_fit_window: empty trace");
  FitOptions o;
  o.c = c;
  o.t_hi = trace.times.back();
  o.t_lo = 0.25 * o.t_hi;
  return o;
}

AmplitudeFit amplitude_fit(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw DataError("amplitude_fit: column lengths differ");
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd M(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = times[static_cast<std::size_t>(i)];
    const double u = values[static_cast<std::size_t>(i)];
    if (!(u > 0.0) || !std::isfinite(u)) {
      std::ostringstream msg;
      msg << "amplitude_fit: u(t, X(t)) underflowed or is invalid at t=" << t
          << "; use the log-patch tail mode or an earlier window";
      throw FitError(msg.str());
    }
    if (!(t > 0.0)) throw FitError("amplitude_fit: times must be positive");
    M(i, 0) = std::log(t);
    M(i, 1) = t;
    M(i, 2) = 1.0;
    y(i) = std::log(u);
  }
  const Lsq lsq = solve_scaled(M, y, 1e12);
  AmplitudeFit fit;
  fit.power_exponent = lsq.coef(0);
  fit.exponential_rate = lsq.coef(1);
  fit.constant = lsq.coef(2);
  fit.residual_rms = lsq.residual_rms;
  fit.samples = static_cast<std::size_t>(n);
  return fit;
}

AmplitudeFit amplitude_fit(const FrontTrace& trace, double t_lo, double t_hi) {
  trace.validate();
  std::vector<double> ts;
  std::vector<double> us;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.times[i] < t_lo || trace.times[i] > t_hi) continue;
    ts.push_back(trace.times[i]);
    us.push_back(trace.u_at_shift[i]);
  }
  return amplitude_fit(ts, us);
}

double profile_distance(const Field& field, const WaveProfile& wave, double b_align) {
  const double xi = level_set(field, b_align);
  if (xi == kNoCrossing) throw DataError("profile_distance: alignment level is not crossed");
  const double shift = xi - wave.inverse_level(b_align);
  double worst = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    worst = std::max(worst, std::abs(field.u[i] - wave(field.x(i) - shift)));
  }
  return worst;
}

RatioStats ratio_to_oracle(const Field& field, const std::function<double(double, double)>& psi,
                           const OracleRegion& region, double psi_floor) {
  RatioStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double z = field.x(i) - region.m;
    if (z < region.z_lo || z > region.z_hi) continue;
    const double p = psi(field.t, field.x(i));
    const double u = field.u[i];
    if (!(p >= psi_floor) || !(u > 0.0)) {
      ++s.skipped;
      continue;
    }
    const double r = u / p;
    s.min = std::min(s.min, r);
    s.max = std::max(s.max, r);
    sum += r;
    ++s.count;
  }
  if (s.count > 0) s.mean = sum / static_cast<double>(s.count);
  return s;
}

std::string format_fit_report(const FitResult& fit, double theta_star) {
  std::ostringstream out;
  out << std::setprecision(17);
  const double rel = theta_star != 0.0 ? std::abs(fit.theta_hat - theta_star) / std::abs(theta_star)
                                       : std::abs(fit.theta_hat);
  out << "c_hat=" << fit.c_hat << '\n'
      << "theta_hat=" << fit.theta_hat << '\n'
      << "theta_star=" << theta_star << '\n'
      << "rel_err=" << rel << '\n'
      << "residual_rms=" << fit.residual_rms << '\n'
      << "window_lo=" << fit.t_lo << '\n'
      << "window_hi=" << fit.t_hi << '\n';
  return out.str();
}

}  // namespace kpplab
