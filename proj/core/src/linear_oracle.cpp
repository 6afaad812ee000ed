#include "kpplab/linear_oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "kpplab/asymptotics.hpp"
#include "kpplab/errors.hpp"

namespace kpplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// log(erfc(z)) without underflow for large z.
double log_erfc(double z) {
  if (z < 20.0) return std::log(std::erfc(z));
  const double z2 = z * z;
  const double series = 1.0 - 0.5 / z2 + 0.75 / (z2 * z2) - 1.875 / (z2 * z2 * z2);
  return -z2 - std::log(z * std::sqrt(kPi)) + std::log(series);
}

// log P(N(mean, 2t) >= a).
double log_upper_gauss(double mean, double t, double a) {
  return std::log(0.5) + log_erfc((a - mean) / (2.0 * std::sqrt(t)));
}

// log P(N(mean, 2t) <= a).
double log_lower_gauss(double mean, double t, double a) {
  return std::log(0.5) + log_erfc((mean - a) / (2.0 * std::sqrt(t)));
}

// log of int_lo^hi exp(g(y)) dy, integrand shifted by its maximum over the
// supplied candidate points, split at those points.
double log_integral(const std::function<double(double)>& g, double lo, double hi,
                    std::vector<double> splits, double tol) {
  if (!(hi > lo)) return -kInf;
  splits.erase(std::remove_if(splits.begin(), splits.end(),
                              [lo, hi](double s) { return !(s > lo && s < hi) || !std::isfinite(s); }),
               splits.end());
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  double gmax = -kInf;
  for (double s : splits) gmax = std::max(gmax, g(s));
  if (std::isfinite(lo)) gmax = std::max(gmax, g(lo));
  if (std::isfinite(hi)) gmax = std::max(gmax, g(hi));
  if (gmax == -kInf) return -kInf;
  std::vector<double> edges;
  edges.push_back(lo);
  edges.insert(edges.end(), splits.begin(), splits.end());
  edges.push_back(hi);
  double total = 0.0;
  double total_err = 0.0;
  auto f = [&](double y) {
    const double v = g(y) - gmax;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    double err = 0.0;
    const double piece = Quad::integrate(f, edges[k], edges[k + 1], 20, tol, &err);
    total += piece;
    total_err += err;
  }
  if (!std::isfinite(total) || total < 0.0) throw QuadratureError("heat-kernel quadrature failed");
  if (total == 0.0) return -kInf;
  // Kronrod error estimates are pessimistic by several orders of magnitude.
  if (total_err > std::max(1e4 * tol, 1e-5) * total + 1e-300) {
    std::ostringstream msg;
    msg << "heat-kernel quadrature did not converge (relative error estimate " << total_err / total
        << ")";
    throw QuadratureError(msg.str());
  }
  return gmax + std::log(total);
}

// Maximiser of g on [lo, hi] by Brent's method (for scaling and splitting only).
double argmax(const std::function<double(double)>& g, double lo, double hi) {
  auto neg = [&g](double y) {
    const double v = g(y);
    return std::isfinite(v) ? -v : 1e300;
  };
  const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
  return r.first;
}

// log E[Y^q; Y >= x0], Y ~ N(m, 2t).
double log_tail_moment(double q, double m, double t, double x0, double tol) {
  if (q == 0.0) return log_upper_gauss(m, t, x0);
  const double s2 = 2.0 * t;
  auto g = [q, m, s2](double y) { return q * std::log(y) - (y - m) * (y - m) / (2.0 * s2); };
  std::vector<double> splits;
  const double disc = m * m + 4.0 * s2 * q;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    splits.push_back(0.5 * (m + r));
    splits.push_back(0.5 * (m - r));
  }
  const double sd = std::sqrt(s2);
  for (double k : {-8.0, 8.0}) {
    if (!splits.empty()) splits.push_back(splits.front() + k * sd);
  }
  return log_integral(g, x0, kInf, splits, tol) - 0.5 * std::log(2.0 * kPi * s2);
}

std::function<double(double)> log_data(const TailInitialData& d) {
  if (d.pure_exponential) {
    const double lam = d.lambda;
    return [lam](double y) { return -lam * y; };
  }
  const double front = d.front();
  const double log_front = front > 0.0 ? std::log(front) : -kInf;
  return [d, log_front](double y) {
    if (y < d.x0) return log_front;
    return d.q * std::log(y) - d.lambda * y;
  };
}

// log int_lo^hi w0(y) K_t(x - y) dy (no e^{Rt}).
double log_kernel_piece(double t, double x, const TailInitialData& data, double lo, double hi,
                        double tol) {
  if (!(hi > lo)) return -kInf;
  const auto lw = log_data(data);
  auto g = [&lw, t, x](double y) { return lw(y) - (x - y) * (x - y) / (4.0 * t); };
  std::vector<double> splits;
  if (!data.pure_exponential) splits.push_back(data.x0);
  const double center = x - 2.0 * data.lambda * t;
  const double sd = std::sqrt(2.0 * t);
  for (double k : {-8.0, 0.0, 8.0}) {
    splits.push_back(center + k * sd);
    splits.push_back(x + k * sd);
  }
  return log_integral(g, lo, hi, splits, tol) - 0.5 * std::log(4.0 * kPi * t);
}

}  // namespace

TailInitialData TailInitialData::exponential(double lambda) {
  TailInitialData d;
  d.lambda = lambda;
  d.q = 0.0;
  d.pure_exponential = true;
  return d;
}

double TailInitialData::front() const {
  if (front_value) return *front_value;
  return std::pow(x0, q) * std::exp(-lambda * x0);
}

double TailInitialData::operator()(double y) const {
  if (pure_exponential) return std::exp(-lambda * y);
  if (y < x0) return front();
  return std::exp(q * std::log(y) - lambda * y);
}

void TailInitialData::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("tail data requires lambda > 0");
  if (!std::isfinite(q)) throw DomainError("tail data requires a finite q");
  if (!pure_exponential && !(x0 >= 1.0)) throw DomainError("tail data requires x0 >= 1");
  if (front_value && !(*front_value >= 0.0 && std::isfinite(*front_value))) {
    throw DomainError("tail data front value must be finite and non-negative");
  }
}

double psi_tail_asymptotic(double t, double x, double R, const TailInitialData& data) {
  const double c = wave_speed(data.lambda, R);
  const double log_e = -data.lambda * (x - c * t);
  if (data.pure_exponential || data.q == 0.0) return std::exp(log_e);
  const double y = x - 2.0 * data.lambda * t;
  if (y <= 0.0) return data.q > 0.0 ? 0.0 : kInf;
  return std::exp(data.q * std::log(y) + log_e);
}

double log_psi_eval(double t, double x, double R, const TailInitialData& data, double quad_tol) {
  if (!(t > 0.0)) throw DomainError("psi_eval requires t > 0");
  if (!(quad_tol > 0.0)) throw DomainError("psi_eval requires quad_tol > 0");
  data.validate();
  const double c = wave_speed(data.lambda, R);
  const double log_e = -data.lambda * (x - c * t);
  if (data.pure_exponential) return log_e;
  const double m = x - 2.0 * data.lambda * t;
  const double tail = log_e + log_tail_moment(data.q, m, t, data.x0, quad_tol);
  const double F = data.front();
  if (!(F > 0.0)) return tail;
  const double front = std::log(F) + R * t + log_lower_gauss(x, t, data.x0);
  return log_sum_exp(tail, front);
}

double psi_eval(double t, double x, double R, const TailInitialData& data, double quad_tol) {
  return std::exp(log_psi_eval(t, x, R, data, quad_tol));
}

double heat_kernel_integral(double t, double x, double R, const std::function<double(double)>& log_w0,
                            double lo, double hi, double quad_tol) {
  if (!(t > 0.0)) throw DomainError("heat_kernel_integral requires t > 0");
  if (!(hi > lo)) return 0.0;
  auto g = [&log_w0, t, x](double y) { return log_w0(y) - (x - y) * (x - y) / (4.0 * t); };
  const double width = 20.0 * std::sqrt(t) + 10.0 * (1.0 + t);
  const double a = std::max(lo, x - width);
  const double b = std::min(hi, x + width);
  std::vector<double> splits;
  if (b > a) {
    const double y_star = argmax(g, a, b);
    const double sd = std::sqrt(2.0 * t);
    for (double k : {-8.0, -2.0, 0.0, 2.0, 8.0}) splits.push_back(y_star + k * sd);
  }
  const double li = log_integral(g, lo, hi, splits, quad_tol);
  return std::exp(R * t + li - 0.5 * std::log(4.0 * kPi * t));
}

// ---------------------------------------------------------------------------
// Lemma-type bounds

namespace {

double sgn(double q) { return q > 0.0 ? 1.0 : (q < 0.0 ? -1.0 : 0.0); }

struct BoundLogs {
  double log_psi = 0.0;
  bool in_near = false;
  bool in_far = false;
  // Pieces independent of C1.
  double log_e = 0.0;        // -lambda (x - c t)
  double log_e_eps = 0.0;    // -(lambda - eps)(x - c t)
  double lower_poly = 0.0;   // (x - 2 lambda t - sgn q delta t)^q
  double upper_poly = 0.0;   // (x - 2 lambda t + sgn q delta t)^q
  double log_far_poly = 0.0; // |q| log(x v 1)
};

BoundLogs bound_logs(double t, double x, double R, const TailInitialData& data,
                     const PsiBoundParams& p) {
  if (!(p.delta > 0.0 && p.delta < 2.0 * data.lambda)) {
    throw DomainError("psi bounds require delta in (0, 2 lambda)");
  }
  if (!(p.epsilon > 0.0 && p.epsilon < p.delta / 6.0)) {
    throw DomainError("psi bounds require epsilon in (0, delta/6)");
  }
  BoundLogs b;
  const double lam = data.lambda;
  const double c = wave_speed(lam, R);
  const double x0 = data.pure_exponential ? 0.0 : data.x0;
  b.log_psi = log_psi_eval(t, x, R, data);
  b.in_near = x >= (2.0 * lam + p.delta) * t + x0;
  b.in_far = x >= c * t;
  b.log_e = -lam * (x - c * t);
  b.log_e_eps = -(lam - p.epsilon) * (x - c * t);
  const double q = data.pure_exponential ? 0.0 : data.q;
  const double base = x - 2.0 * lam * t;
  b.lower_poly = std::pow(base - sgn(q) * p.delta * t, q);
  b.upper_poly = std::pow(base + sgn(q) * p.delta * t, q);
  b.log_far_poly = std::abs(q) * std::log(std::max(x, 1.0));
  return b;
}

}  // namespace

PsiBoundsReport psi_bounds_check(double t, double x, double R, const TailInitialData& data,
                                 const PsiBoundParams& params) {
  const BoundLogs b = bound_logs(t, x, R, data, params);
  const double psi = std::exp(b.log_psi);
  const double C1 = params.C1;
  PsiBoundsReport r;
  if (b.in_near) {
    r.lower.applicable = true;
    r.lower.lhs = psi;
    r.lower.rhs = b.lower_poly * (1.0 - C1 * std::exp(-params.delta * params.delta * t / 8.0)) *
                  std::exp(b.log_e);
    r.lower.satisfied = r.lower.lhs >= r.lower.rhs;

    r.upper_near.applicable = true;
    r.upper_near.lhs = psi;
    r.upper_near.rhs = b.upper_poly * std::exp(b.log_e) +
                       C1 * std::exp(b.log_e_eps - params.delta * params.delta * t / 19.0);
    r.upper_near.satisfied = r.upper_near.lhs <= r.upper_near.rhs;
  }
  const double log_far = std::log(C1) + b.log_far_poly + b.log_e_eps;
  if (b.in_far) {
    r.upper_far.applicable = true;
    r.upper_far.lhs = psi;
    r.upper_far.rhs = std::exp(log_far);
    r.upper_far.satisfied = b.log_psi <= log_far;
  }
  r.global.applicable = true;
  r.global.lhs = std::min(psi, 1.0);
  r.global.rhs = std::exp(log_far);
  r.global.satisfied = std::min(b.log_psi, 0.0) <= log_far;
  return r;
}

double calibrate_psi_bounds(double R, const TailInitialData& data, double delta, double epsilon,
                            std::span<const std::pair<double, double>> training_points,
                            double safety) {
  if (training_points.empty()) throw DomainError("calibrate_psi_bounds needs training points");
  PsiBoundParams p{delta, epsilon, 1.0};
  double needed = 1.0;
  for (const auto& [t, x] : training_points) {
    const BoundLogs b = bound_logs(t, x, R, data, p);
    const double psi = std::exp(b.log_psi);
    if (b.in_near) {
      const double main = b.lower_poly * std::exp(b.log_e);
      if (main > 0.0 && psi < main) {
        needed = std::max(needed, (1.0 - psi / main) * std::exp(delta * delta * t / 8.0));
      }
      const double excess = psi - b.upper_poly * std::exp(b.log_e);
      if (excess > 0.0) {
        needed = std::max(needed, excess / std::exp(b.log_e_eps - delta * delta * t / 19.0));
      }
    }
    const double log_far = b.log_far_poly + b.log_e_eps;
    if (b.in_far) needed = std::max(needed, std::exp(b.log_psi - log_far));
    needed = std::max(needed, std::exp(std::min(b.log_psi, 0.0) - log_far));
  }
  return needed * safety;
}

WindowTail j_window_tail(double t, double x, double lambda_bar, double delta,
                         const TailInitialData& data) {
  if (!(t > 0.0) || !(lambda_bar > 0.0) || !(delta >= 0.0)) {
    throw DomainError("j_window_tail requires t > 0, lambda_bar > 0, delta >= 0");
  }
  data.validate();
  const double centre = x - 2.0 * lambda_bar * t;
  const double a = centre - delta * t;
  const double b = centre + delta * t;
  const double tol = 1e-10;
  double li;
  if (delta == 0.0) {
    li = log_kernel_piece(t, x, data, -kInf, kInf, tol);
  } else {
    li = log_sum_exp(log_kernel_piece(t, x, data, -kInf, a, tol),
                     log_kernel_piece(t, x, data, b, kInf, tol));
  }
  WindowTail w;
  w.log_integral = li;
  w.log_bound = -lambda_bar * x + lambda_bar * lambda_bar * t - delta * delta * t / 8.0;
  return w;
}

// ---------------------------------------------------------------------------
// Moving Dirichlet boundary

double MovingBoundarySpec::epsilon() const { return eta / std::sqrt(t0); }

std::vector<double> MovingBoundarySpec::default_bump(double dy) {
  if (!(dy > 0.0)) throw DomainError("default_bump requires dy > 0");
  const std::size_t n = static_cast<std::size_t>(std::floor(2.0 / dy + 1e-9));
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const double y = static_cast<double>(j) * dy;
    v[j] = y * y * (2.0 - y) * (2.0 - y);
  }
  return v;
}

double MovingBoundarySolution::scaled(std::size_t k, std::size_t j) const {
  return std::exp(-0.5 * spec.beta * y(j)) * hat[k][j];
}

double MovingBoundarySolution::log_phi(std::size_t k, std::size_t j) const {
  const double t = times[k];
  return std::log(hat[k][j]) - 0.5 * spec.beta * y(j) - 0.25 * spec.beta * spec.beta * t;
}

namespace {

double profile_prefactor(const MovingBoundarySpec& s, double t, double p) {
  return std::pow(t + s.t0, p) / std::pow(s.t0, p + 0.5);
}

}  // namespace

double MovingBoundarySolution::h(std::size_t k, std::size_t j) const {
  if (j == 0) j = 1;
  const double t = times[k];
  const double p = power_exponent();
  const double yy = y(j);
  const double ratio = hat[k][j] / (fitted_C * profile_prefactor(spec, t, p) * yy);
  return ratio - std::exp(-yy * yy / (4.0 * (t + spec.t0)));
}

std::vector<double> MovingBoundarySolution::shape_ratio(std::size_t k) const {
  const double t = times[k];
  if (!(t > 0.0)) throw DomainError("shape_ratio requires t > 0");
  const double p = power_exponent();
  std::vector<double> out;
  for (std::size_t j = 1; j < hat[k].size() && y(j) <= std::sqrt(1.0 + t); ++j) {
    const double yy = y(j);
    out.push_back(hat[k][j] * std::exp(yy * yy / (4.0 * t)) / (std::pow(t, p) * yy));
  }
  return out;
}

MovingBoundarySolution phi_solve(const MovingBoundarySpec& spec_in, double T, double dy, double dt,
                                 const PhiSolveOptions& options) {
  MovingBoundarySpec spec = spec_in;
  if (!(spec.beta >= 2.0) || !std::isfinite(spec.eta)) {
    throw ConfigError("moving boundary requires beta >= 2 and finite eta");
  }
  if (!(spec.t0 > 0.0)) throw ConfigError("moving boundary requires t0 > 0");
  // |epsilon| < 1 is enforced by raising t0.
  if (!(std::abs(spec.epsilon()) < 1.0)) spec.t0 = std::max(spec.t0, 4.0 * spec.eta * spec.eta);
  if (!(dy > 0.0) || !(dt > 0.0)) throw ConfigError("phi_solve requires dy > 0 and dt > 0");
  if (!(T > spec.onset())) {
    std::ostringstream msg;
    msg << "phi_solve requires T > t1 = " << spec.onset();
    throw ConfigError(msg.str());
  }
  if (spec.phi0.empty()) spec.phi0 = MovingBoundarySpec::default_bump(spec.phi0_dy);
  if (options.snapshots < 2) throw ConfigError("phi_solve needs at least 2 snapshots");
  const double Y = 10.0 * std::sqrt(T + spec.t0);
  const std::size_t n = static_cast<std::size_t>(std::ceil(Y / dy));
  if (n > 50'000'000) throw ConfigError("phi_solve grid too large");
  if (dt > 0.25 * (T + spec.t0)) throw ConfigError("phi_solve time step too large");

  MovingBoundarySolution sol;
  sol.dy = dy;
  sol.y_max = static_cast<double>(n) * dy;
  const double beta = spec.beta;
  const double eta = spec.eta;
  const double t0 = spec.t0;

  // psi-hat on nodes 0..n with Dirichlet zero at both ends.
  std::vector<double> u(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const double yy = static_cast<double>(j) * dy;
    const double pos = yy / spec.phi0_dy;
    const std::size_t k = static_cast<std::size_t>(pos);
    if (k + 1 >= spec.phi0.size()) continue;
    const double w = pos - static_cast<double>(k);
    const double phi0 = (1.0 - w) * spec.phi0[k] + w * spec.phi0[k + 1];
    if (phi0 < 0.0) throw ConfigError("phi0 must be non-negative");
    u[j] = std::exp(0.5 * beta * yy) * phi0;
  }

  const double tau_T = std::log((T + t0) / t0);
  std::vector<double> snap_t(options.snapshots);
  for (std::size_t k = 0; k < options.snapshots; ++k) {
    const double tau = tau_T * static_cast<double>(k) / static_cast<double>(options.snapshots - 1);
    snap_t[k] = k + 1 == options.snapshots ? T : t0 * (std::exp(tau) - 1.0);
  }
  auto store = [&](double t) {
    sol.times.push_back(t);
    sol.hat.push_back(u);
    double amp = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      amp = std::max(amp, std::exp(-0.5 * beta * static_cast<double>(j) * dy) * u[j]);
    }
    sol.amplitude.push_back(amp);
  };

  const std::size_t m = n - 1;  // interior unknowns 1..n-1
  std::vector<double> a(m), b(m), c(m), d(m);
  auto op = [&](double t, double& lo, double& di, double& hi) {
    const double adv = eta / (t + t0);
    const double react = beta * eta / (2.0 * (t + t0));
    lo = 1.0 / (dy * dy) + adv / (2.0 * dy);
    hi = 1.0 / (dy * dy) - adv / (2.0 * dy);
    di = -2.0 / (dy * dy) + react;
  };
  auto step = [&](double t, double h, bool implicit_euler) {
    double lo0, di0, hi0, lo1, di1, hi1;
    op(t, lo0, di0, hi0);
    op(t + h, lo1, di1, hi1);
    const double th = implicit_euler ? 1.0 : 0.5;
    const double ex = 1.0 - th;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + 1;
      d[i] = u[j] + ex * h * (lo0 * u[j - 1] + di0 * u[j] + hi0 * u[j + 1]);
      a[i] = -th * h * lo1;
      b[i] = 1.0 - th * h * di1;
      c[i] = -th * h * hi1;
    }
    for (std::size_t i = 1; i < m; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    d[m - 1] /= b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    for (std::size_t i = 0; i < m; ++i) u[i + 1] = d[i] < 0.0 && d[i] > -1e-300 ? 0.0 : d[i];
  };

  double t = 0.0;
  std::size_t next = 0;
  store(0.0);
  next = 1;
  int startup = 4;
  while (next < snap_t.size()) {
    const double target = snap_t[next];
    while (t < target - 1e-12 * (1.0 + target)) {
      const double h = std::min(dt, target - t);
      if (startup > 0) {
        step(t, 0.5 * h, true);
        step(t + 0.5 * h, 0.5 * h, true);
        --startup;
      } else {
        step(t, h, false);
      }
      t += h;
    }
    t = target;
    store(t);
    ++next;
  }
  for (const auto& row : sol.hat) {
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw NumericalError("phi_solve lost positivity");
    }
  }

  // Amplitude exponent over [T/2, T].
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double cnt = 0;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      if (sol.times[k] < 0.5 * T) continue;
      const double lx = std::log(sol.times[k] + t0);
      const double ly = std::log(sol.amplitude[k]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      cnt += 1;
    }
    sol.amplitude_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }

  sol.spec = spec;
  // C from a least-squares fit of the closed-form profile at t = T.
  {
    const std::size_t k = sol.times.size() - 1;
    const double p = sol.power_exponent();
    const double pre = profile_prefactor(spec, T, p);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 1; j <= n && sol.y(j) <= std::sqrt(T + t0); ++j) {
      const double yy = sol.y(j);
      const double g = std::exp(-yy * yy / (4.0 * (T + t0)));
      const double r = sol.hat[k][j] / (pre * yy);
      num += r * g;
      den += g * g;
    }
    sol.fitted_C = num / den;
  }
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    double worst = 0.0;
    for (std::size_t j = 1; j < n; ++j) worst = std::max(worst, std::abs(sol.h(k, j)));
    sol.h_sup.push_back(worst);
  }
  return sol;
}

void write_amplitude_csv(const MovingBoundarySolution& s, std::ostream& out) {
  out << "# kpplab-csv v1\n"
      << "t,phi_max,amp_exponent\n"
      << std::setprecision(17);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    out << s.times[k] << ',' << s.amplitude[k] << ',' << s.amplitude_exponent << '\n';
  }
}

void write_psi_csv(std::span<const std::pair<double, double>> points, double R,
                   const TailInitialData& data, std::ostream& out) {
  out << "# kpplab-csv v1\n"
      << "t,x,psi\n"
      << std::setprecision(17);
  for (const auto& [t, x] : points) out << t << ',' << x << ',' << psi_eval(t, x, R, data) << '\n';
}

// ---------------------------------------------------------------------------
// Self-similar frame

double principal_mode(double z) {
  return z * std::exp(-z * z / 8.0) / std::sqrt(2.0 * std::sqrt(kPi));
}

double selfsimilar_v(const MovingBoundarySpec& spec, double t, double y, double log_phi) {
  const double tau = std::log((t + spec.t0) / spec.t0);
  const double k = 0.5 * spec.beta * spec.eta - 1.0;
  return std::exp(-k * tau + 0.25 * spec.beta * spec.beta * t + 0.5 * spec.beta * y + log_phi);
}

double selfsimilar_log_phi(const MovingBoundarySpec& spec, double t, double y, double v) {
  const double tau = std::log((t + spec.t0) / spec.t0);
  const double k = 0.5 * spec.beta * spec.eta - 1.0;
  return std::log(v) + k * tau - 0.25 * spec.beta * spec.beta * t - 0.5 * spec.beta * y;
}

SelfSimilarProjection selfsimilar_project(const MovingBoundarySolution& s) {
  constexpr double kZCut = 8.0;
  SelfSimilarProjection out;
  const double t0 = s.spec.t0;
  const double k_exp = 0.5 * s.spec.beta * s.spec.eta - 1.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double t = s.times[k];
    const double tau = std::log((t + t0) / t0);
    const double root = std::sqrt(t + t0);
    const double dz = s.dy / root;
    const double scale = std::exp(-k_exp * tau);
    std::vector<double> w;
    std::vector<double> e0;
    for (std::size_t j = 0; j < s.hat[k].size(); ++j) {
      const double z = s.y(j) / root;
      if (z > kZCut) break;
      w.push_back(std::exp(z * z / 8.0) * scale * s.hat[k][j]);
      e0.push_back(principal_mode(z));
    }
    auto trapz = [dz](const std::vector<double>& f) {
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < f.size(); ++j) acc += 0.5 * (f[j] + f[j + 1]);
      return acc * dz;
    };
    std::vector<double> prod(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) prod[j] = w[j] * e0[j];
    const double proj = trapz(prod);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double r = w[j] - proj * e0[j];
      prod[j] = r * r;
    }
    out.tau.push_back(tau);
    out.mode.push_back(proj);
    out.remainder.push_back(std::sqrt(trapz(prod)));
  }
  return out;
}

double SelfSimilarProjection::decay_rate(double tau_lo, double tau_hi) const {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (tau[k] < tau_lo || tau[k] > tau_hi || !(remainder[k] > 0.0)) continue;
    const double ly = std::log(remainder[k]);
    sx += tau[k];
    sy += ly;
    sxx += tau[k] * tau[k];
    sxy += tau[k] * ly;
    n += 1;
  }
  if (n < 3) throw FitError("decay_rate needs at least 3 snapshots in the window");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace kpplab
