#include "kpplab/pde_solver.hpp"

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "kpplab/errors.hpp"

namespace kpplab {
namespace {

// Exact flow of u' = u (r - u) over time s (s may be negative).
double logistic_flow(double u, double r, double s) {
  const double E = std::exp(r * s);
  return r * E * u / (r + u * (E - 1.0));
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kUpperSlack = 1e-12;
constexpr double kPlateauTolerance = 1e-6;
// Negative values smaller than this in magnitude are rounding noise of the
// implicit solves in the underflow region and are floored to zero.
constexpr double kNegativeNoise = 1e-200;
constexpr std::size_t kZeroPad = 128;
constexpr std::size_t kExtendChunk = 256;
constexpr std::size_t kDropChunk = 1024;
constexpr std::size_t kLogOverlap = 16;

// Flush denormals to zero for the lifetime of the guard (x86 only).
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

// LU factors of the constant tridiagonal matrix
//   row 0:  diag x0 + first_super x1
//   row i:  sub x_{i-1} + diag x_i + sub x_{i+1}
// truncated to any leading size.
struct ToeplitzFactor {
  double sub = 0.0;
  double diag = 1.0;
  double first_super = 0.0;
  std::vector<double> cp;
  std::vector<double> inv;

  void ensure(std::size_t n) {
    if (cp.size() >= n) return;
    std::size_t i = cp.size();
    cp.resize(n);
    inv.resize(n);
    for (; i < n; ++i) {
      const double den = i == 0 ? diag : diag - sub * cp[i - 1];
      if (!(std::abs(den) > 0.0) || !std::isfinite(den)) {
        throw NumericalError("tridiagonal factorisation broke down");
      }
      inv[i] = 1.0 / den;
      cp[i] = (i == 0 ? first_super : sub) * inv[i];
    }
  }

  void solve(double* d, std::size_t n) {
    if (n == 0) return;
    ensure(n);
    d[0] *= inv[0];
    for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - sub * d[i - 1]) * inv[i];
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
  }
};

// General tridiagonal solve (Thomas); a = sub, b = diag, c = super. Overwrites d.
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
            std::vector<double>& d, std::size_t n) {
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(std::abs(b[i - 1]) > 0.0)) throw NumericalError("tridiagonal solve broke down");
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  if (!(std::abs(b[n - 1]) > 0.0)) throw NumericalError("tridiagonal solve broke down");
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

enum class DiffusionKind { CompactCN, CompactBE, StandardBE, LogBE };

std::string where(double t, double x, double value) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "(t=" << t << ", x=" << x << ", u=" << value << ")";
  return msg.str();
}

}  // namespace

std::string_view to_string(DomainMode mode) noexcept {
  switch (mode) {
    case DomainMode::ShiftingEnvironment:
      return "shifting";
    case DomainMode::GrowingDomain:
      return "growing";
    case DomainMode::WholeLine:
      return "whole-line";
  }
  return "unknown";
}

std::string_view to_string(TimeScheme scheme) noexcept {
  switch (scheme) {
    case TimeScheme::StrangCompact:
      return "strang-compact";
    case TimeScheme::Imex:
      return "imex";
    case TimeScheme::CrankNicolsonNewton:
      return "cn-newton";
  }
  return "unknown";
}

std::string_view to_string(TailMode mode) noexcept {
  switch (mode) {
    case TailMode::Linear:
      return "linear";
    case TailMode::LogPatch:
      return "log-patch";
  }
  return "unknown";
}

double GrowingDomainSpec::boundary_value(double t, double x, double R) const {
  const double B = R;
  const double y = x - 2.0 * lambda * t;
  const double log_e = -lambda * x + (lambda * lambda + R) * t;
  double value;
  if (q == 0.0) {
    value = std::exp(log_e);
  } else if (y <= 0.0) {
    value = q > 0.0 ? 0.0 : B;
  } else {
    value = std::exp(q * std::log(y) + log_e);
  }
  return std::min(B, value);
}

double Scenario::plateau() const {
  return mode == DomainMode::ShiftingEnvironment ? 1.0 - env.a : R;
}

double Scenario::rate_ahead() const {
  return mode == DomainMode::ShiftingEnvironment ? 1.0 : R;
}

double Scenario::shift(double t) const {
  return mode == DomainMode::ShiftingEnvironment ? env.shift(t) : kNaN;
}

std::vector<double> Scenario::trace_levels() const {
  if (!observers.levels.empty()) return observers.levels;
  return {0.5 * plateau()};
}

std::vector<std::string> Scenario::problems() const {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& what) { out.push_back(what); };
  const SolverConfig& s = solver;
  if (!(s.dx > 0.0) || !std::isfinite(s.dx)) fail("solver.dx must be positive");
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) fail("solver.dt must be positive");
  if (s.scheme == TimeScheme::Imex && s.dt > s.dx) fail("solver.dt must not exceed dx for imex");
  if (s.scheme == TimeScheme::StrangCompact && s.dt < s.dx * s.dx / 6.0) {
    fail("solver.dt must be at least dx^2/6 for strang-compact");
  }
  if (!(s.window_kappa > 0.0)) fail("solver.window_kappa must be positive");
  if (!(s.left_margin > 4.0 * s.dx)) fail("solver.left_margin must exceed 4 dx");
  if (!(s.u_switch > 0.0 && s.u_switch < 1e-4)) fail("solver.u_switch must lie in (0, 1e-4)");
  if (s.startup_steps < 0) fail("solver.startup_steps must be non-negative");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("scenario.T must be positive");
  if (!(observers.trace_cadence > 0.0)) fail("output.cadence must be positive");
  if (!(std::isfinite(env.a) && env.a >= 0.0 && env.a < 1.0)) fail("scenario.a must lie in [0, 1)");
  if (!std::isfinite(env.beta) || env.beta < 0.0) fail("scenario.beta must be >= 0");
  if (!std::isfinite(env.eta)) fail("scenario.eta must be finite");
  if (!(R > 0.0) || !std::isfinite(R)) fail("scenario.R must be positive");
  if (mode != DomainMode::ShiftingEnvironment && env.a != 0.0) {
    fail("scenario.a must be 0 outside the shifting-environment mode");
  }
  const double top = plateau();
  for (double b : trace_levels()) {
    if (!(b > 0.0 && b < top)) fail("analysis.levels must lie in (0, plateau)");
  }
  if (mode == DomainMode::GrowingDomain) {
    const GrowingDomainSpec& g = growing;
    if (!(g.lambda > 0.0 && g.lambda <= std::sqrt(R) + 1e-12)) {
      fail("growing.lambda must lie in (0, sqrt(R)]");
    }
    if (!(g.boundary_speed > wave_speed(g.lambda, R))) {
      fail("growing.boundary_speed must exceed c_lambda");
    }
    if (g.g_front && !(*g.g_front > 0.0 && *g.g_front <= R)) {
      fail("growing.g_front must lie in (0, R]");
    }
    if (!std::holds_alternative<HeavisideFront>(initial)) {
      fail("growing-domain mode takes its data from the boundary; initial must be heaviside");
    }
  }
  if (const auto* tail = std::get_if<TailInitialData>(&initial)) {
    try {
      tail->validate();
    } catch (const Error& e) {
      fail(std::string("initial tail data: ") + e.what());
    }
    if (tail->front_value && *tail->front_value > top) fail("tail front value exceeds the plateau");
  }
  if (const auto* samples = std::get_if<ExplicitSamples>(&initial)) {
    if (samples->values.empty()) fail("explicit samples are empty");
    const double k = samples->x_lo / s.dx;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, std::abs(k))) {
      fail("explicit samples must start on the lattice x = k dx");
    }
    for (double v : samples->values) {
      if (!(v >= 0.0 && v <= top + kUpperSlack)) {
        fail("explicit samples must lie in [0, plateau]");
        break;
      }
    }
  }
  return out;
}

void Scenario::validate() const {
  const auto list = problems();
  if (list.empty()) return;
  std::string msg = list.front();
  for (std::size_t i = 1; i < list.size(); ++i) msg += "; " + list[i];
  throw ConfigError(msg);
}

// ---------------------------------------------------------------------------

struct Solver::Impl {
  Scenario sc;
  Field f;
  RunDiagnostics diag;
  std::map<std::pair<int, double>, ToeplitzFactor> factors;
  std::vector<double> work;
  std::vector<double> ta, tb, tc, td, tmp;
  double upper = 1.0;

  Impl(Scenario scenario, Field field) : sc(std::move(scenario)), f(std::move(field)) {
    upper = sc.rate_ahead();
    if (const auto* s = std::get_if<ExplicitSamples>(&sc.initial)) {
      for (double v : s->values) upper = std::max(upper, v);
    }
    diag.max_window = f.size();
  }

  double dx() const { return sc.solver.dx; }
  double x_at(std::size_t i) const { return f.x(i); }

  ToeplitzFactor& factor(DiffusionKind kind, double h) {
    auto key = std::make_pair(static_cast<int>(kind), h);
    auto it = factors.find(key);
    if (it != factors.end()) return it->second;
    const double s = h / (dx() * dx());
    ToeplitzFactor F;
    switch (kind) {
      case DiffusionKind::CompactCN:
        F.sub = 1.0 / 12.0 - 0.5 * s;
        F.diag = 10.0 / 12.0 + s;
        break;
      case DiffusionKind::CompactBE:
        F.sub = 1.0 / 12.0 - s;
        F.diag = 10.0 / 12.0 + 2.0 * s;
        break;
      case DiffusionKind::StandardBE:
      case DiffusionKind::LogBE:
        F.sub = -s;
        F.diag = 1.0 + 2.0 * s;
        break;
    }
    F.first_super = kind == DiffusionKind::LogBE ? F.sub : 2.0 * F.sub;
    return factors.emplace(key, std::move(F)).first->second;
  }

  // ---- growth rate -------------------------------------------------------

  // Fills rates for nodes [0, n) at time tau; returns nothing for homogeneous modes.
  void rates(double tau, std::size_t n, std::vector<double>& r) const {
    r.resize(n);
    if (sc.mode != DomainMode::ShiftingEnvironment) {
      std::fill(r.begin(), r.end(), sc.R);
      return;
    }
    const double a = sc.env.a;
    const double X = sc.env.shift(tau);
    const double h = dx();
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = x_at(i) - 0.5 * h;
      const double frac = std::clamp((X - lo) / h, 0.0, 1.0);
      r[i] = 1.0 - a * frac;
    }
  }

  // Exact logistic flow u' = u (r - u) for time h on nodes [0, n).
  void logistic(double tau, double h, std::size_t n) {
    double* u = f.u.data();
    if (sc.mode != DomainMode::ShiftingEnvironment || sc.env.a == 0.0) {
      const double r = sc.mode == DomainMode::ShiftingEnvironment ? 1.0 : sc.R;
      const double E = std::exp(r * h);
      const double rE = r * E;
      const double Em1 = E - 1.0;
      for (std::size_t i = 0; i < n; ++i) u[i] = rE * u[i] / (r + u[i] * Em1);
      return;
    }
    const double X = sc.env.shift(tau);
    const double dxv = dx();
    const double rm = 1.0 - sc.env.a;
    const double Em = std::exp(rm * h);
    const double Ep = std::exp(h);
    // Node i is fully behind X when x_i + dx/2 <= X.
    const double k_behind = std::floor((X - 0.5 * dxv) / dxv) - static_cast<double>(f.first_index);
    const std::size_t nb =
        k_behind < 0.0 ? 0 : std::min<std::size_t>(n, static_cast<std::size_t>(k_behind) + 1);
    for (std::size_t i = 0; i < nb; ++i) u[i] = rm * Em * u[i] / (rm + u[i] * (Em - 1.0));
    std::size_t i = nb;
    for (; i < n; ++i) {
      const double lo = x_at(i) - 0.5 * dxv;
      const double frac = std::clamp((X - lo) / dxv, 0.0, 1.0);
      if (frac <= 0.0) break;
      const double r = 1.0 - sc.env.a * frac;
      const double E = std::exp(r * h);
      u[i] = r * E * u[i] / (r + u[i] * (E - 1.0));
    }
    for (; i < n; ++i) u[i] = Ep * u[i] / (1.0 + u[i] * (Ep - 1.0));
  }

  // ---- boundary data -----------------------------------------------------

  bool right_is_data() const {
    return sc.mode == DomainMode::GrowingDomain ||
           std::holds_alternative<TailInitialData>(sc.initial);
  }

  double right_value(double t, double x) const {
    if (sc.mode == DomainMode::GrowingDomain) return sc.growing.boundary_value(t, x, sc.R);
    if (const auto* tail = std::get_if<TailInitialData>(&sc.initial)) {
      const double v = psi_tail_asymptotic(t, x, sc.rate_ahead(), *tail);
      return std::min(sc.plateau(), v);
    }
    return 0.0;
  }

  // Index of the Dirichlet node closing the active region.
  std::size_t active_end() const {
    const std::size_t n = f.size();
    if (f.has_log_tail()) {
      return static_cast<std::size_t>(f.log_first_index - f.first_index) + kLogOverlap;
    }
    if (right_is_data()) return n - 1;
    std::size_t last = n;
    for (std::size_t i = n; i-- > 0;) {
      if (f.u[i] != 0.0) {
        last = i;
        break;
      }
    }
    if (last == n) return std::min<std::size_t>(n - 1, kZeroPad);
    return std::min(n - 1, last + kZeroPad);
  }

  // ---- diffusion ---------------------------------------------------------

  // Compact Crank-Nicolson (theta = 1/2) or backward Euler (theta = 1) on
  // unknowns [0, m), Neumann at 0, Dirichlet g_old -> g_new at node m.
  void compact_diffusion(double h, bool implicit_euler, std::size_t m, double g_old, double g_new) {
    if (m == 0) return;
    const double s = h / (dx() * dx());
    const double* u = f.u.data();
    work.resize(m);
    double* d = work.data();
    double w_off, w_diag;
    if (implicit_euler) {
      w_off = 1.0 / 12.0;
      w_diag = 10.0 / 12.0;
    } else {
      w_off = 1.0 / 12.0 + 0.5 * s;
      w_diag = 10.0 / 12.0 - s;
    }
    ToeplitzFactor& F = factor(implicit_euler ? DiffusionKind::CompactBE : DiffusionKind::CompactCN, h);
    if (m == 1) {
      d[0] = w_diag * u[0] + 2.0 * w_off * g_old - 2.0 * F.sub * g_new;
    } else {
      d[0] = w_diag * u[0] + 2.0 * w_off * u[1];
      for (std::size_t i = 1; i + 1 < m; ++i) d[i] = w_diag * u[i] + w_off * (u[i - 1] + u[i + 1]);
      d[m - 1] = w_diag * u[m - 1] + w_off * (u[m - 2] + g_old) - F.sub * g_new;
    }
    F.solve(d, m);
    std::copy(d, d + m, f.u.data());
  }

  void standard_be_diffusion(double h, std::size_t m, double g_new) {
    if (m == 0) return;
    ToeplitzFactor& F = factor(DiffusionKind::StandardBE, h);
    double* d = f.u.data();
    d[m - 1] -= F.sub * g_new;
    F.solve(d, m);
  }

  // ---- schemes -----------------------------------------------------------

  void step_strang(double t, double h, bool damped, std::size_t m, double g_old, double g_new) {
    const double half = 0.5 * h;
    // Boundary data as seen by the diffusion substep: g_old after the first
    // reaction half step, g_new before the second.
    const double rr = sc.rate_ahead();
    const double g_a = logistic_flow(g_old, rr, half);
    const double g_b = logistic_flow(g_new, rr, -half);
    logistic(t + 0.25 * h, half, m);
    if (damped) {
      const double g_mid = 0.5 * (g_a + g_b);
      compact_diffusion(half, true, m, g_a, g_mid);
      compact_diffusion(half, true, m, g_mid, g_b);
    } else {
      compact_diffusion(h, false, m, g_a, g_b);
    }
    logistic(t + 0.75 * h, half, m);
  }

  void step_imex(double t, double h, std::size_t m, double g_new) {
    rates(t + 0.5 * h, m, tmp);
    double* u = f.u.data();
    for (std::size_t i = 0; i < m; ++i) u[i] += h * u[i] * (tmp[i] - u[i]);
    standard_be_diffusion(h, m, g_new);
  }

  // Trapezoidal rule (theta = 1/2) or backward Euler (theta = 1), Newton on the
  // full nonlinear system with the 3-point Laplacian.
  void step_cn_newton(double t, double h, double theta, std::size_t m, double g_old, double g_new) {
    if (m == 0) return;
    const double s = h / (dx() * dx());
    std::vector<double> r_old, r_new;
    rates(t, m, r_old);
    rates(t + h, m, r_new);
    const std::vector<double> u0(f.u.begin(), f.u.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<double> explicit_part(m);
    const double e = 1.0 - theta;
    for (std::size_t i = 0; i < m; ++i) {
      const double right = i + 1 < m ? u0[i + 1] : g_old;
      const double lap =
          i == 0 ? 2.0 * right - 2.0 * u0[0] : u0[i - 1] - 2.0 * u0[i] + right;
      explicit_part[i] = u0[i] + e * (s * lap + h * u0[i] * (r_old[i] - u0[i]));
    }
    std::vector<double> v = u0;
    ta.resize(m);
    tb.resize(m);
    tc.resize(m);
    td.resize(m);
    for (int iter = 0; iter < 20; ++iter) {
      double max_delta = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double right = i + 1 < m ? v[i + 1] : g_new;
        const double lap = i == 0 ? 2.0 * right - 2.0 * v[0] : v[i - 1] - 2.0 * v[i] + right;
        const double resid = v[i] - theta * (s * lap + h * v[i] * (r_new[i] - v[i])) - explicit_part[i];
        td[i] = -resid;
        tb[i] = 1.0 + theta * (2.0 * s - h * (r_new[i] - 2.0 * v[i]));
        ta[i] = -theta * s;
        tc[i] = i == 0 ? -2.0 * theta * s : -theta * s;
      }
      thomas(ta, tb, tc, td, m);
      for (std::size_t i = 0; i < m; ++i) {
        v[i] += td[i];
        max_delta = std::max(max_delta, std::abs(td[i]));
      }
      if (max_delta <= 1e-14) {
        std::copy(v.begin(), v.end(), f.u.begin());
        return;
      }
    }
    throw NumericalError("Newton iteration did not converge at t=" + std::to_string(t));
  }

  // ---- log tail ----------------------------------------------------------

  void step_log_tail(double t, double h) {
    const std::size_t s0 = static_cast<std::size_t>(f.log_first_index - f.first_index);
    std::vector<double>& l = f.log_u;
    const std::size_t L = l.size();
    if (L < 3) return;
    const double dxv = dx();
    const double left = f.u[s0 - 1] > 0.0 ? std::log(f.u[s0 - 1]) : l[0] + (l[0] - l[1]);
    rates(t + 0.5 * h, f.size(), tmp);
    std::vector<double> rhs(L);
    for (std::size_t k = 0; k < L; ++k) {
      const double lm = k == 0 ? left : l[k - 1];
      const double lp = k + 1 < L ? l[k + 1] : 2.0 * l[k] - l[k - 1];
      const double grad = (lp - lm) / (2.0 * dxv);
      rhs[k] = l[k] + h * (grad * grad + tmp[s0 + k] - std::exp(l[k]));
    }
    // Last node: zero curvature closure, explicit.
    const double last = rhs[L - 1];
    ToeplitzFactor& F = factor(DiffusionKind::LogBE, h);
    rhs[0] -= F.sub * left;
    rhs[L - 2] -= F.sub * last;
    // Row 0 of the LogBE factor has a plain super diagonal, as needed here.
    F.solve(rhs.data(), L - 1);
    std::copy(rhs.begin(), rhs.end() - 1, l.begin());
    l[L - 1] = last;
  }

  // ---- one step ----------------------------------------------------------

  // Growing domain: adds lattice nodes passed by the boundary x_b(t).
  void grow_to(double t) {
    if (sc.mode != DomainMode::GrowingDomain) return;
    const std::int64_t last = lattice_floor(sc.growing.boundary(t));
    const std::int64_t have = f.first_index + static_cast<std::int64_t>(f.size()) - 1;
    for (std::int64_t k = have + 1; k <= last; ++k) {
      f.u.push_back(sc.growing.boundary_value(t, static_cast<double>(k) * dx(), sc.R));
    }
  }

  void advance_field(double h) {
    const double t = f.t;
    grow_to(t);
    // Clamped boundary data has corners in time; the moving Dirichlet node is
    // advanced with the monotone (backward Euler) substeps throughout.
    const bool damped =
        f.steps < sc.solver.startup_steps || sc.mode == DomainMode::GrowingDomain;
    std::size_t m = active_end();
    const bool data_right = right_is_data();
    double g_old = data_right ? f.u[m] : 0.0;
    double g_new = data_right ? right_value(t + h, x_at(m)) : 0.0;

    if (f.has_log_tail()) {
      step_log_tail(t, h);
      const std::size_t s0 = static_cast<std::size_t>(f.log_first_index - f.first_index);
      g_old = f.u[m];
      g_new = std::exp(f.log_u[m - s0]);
    }

    switch (sc.solver.scheme) {
      case TimeScheme::StrangCompact:
        step_strang(t, h, damped, m, g_old, g_new);
        break;
      case TimeScheme::Imex:
        step_imex(t, h, m, g_new);
        break;
      case TimeScheme::CrankNicolsonNewton:
        step_cn_newton(t, h, damped ? 1.0 : 0.5, m, g_old, g_new);
        break;
    }
    f.u[m] = g_new;
    if (!f.has_log_tail() && !data_right) {
      // Cells beyond the active region stay exactly zero.
      std::fill(f.u.begin() + static_cast<std::ptrdiff_t>(m) + 1, f.u.end(), 0.0);
    }
    f.t = t + h;
    f.steps += 1;
    diag.steps += 1;

    if (f.has_log_tail()) {
      const std::size_t s0 = static_cast<std::size_t>(f.log_first_index - f.first_index);
      for (std::size_t i = s0; i < m; ++i) {
        f.log_u[i - s0] = f.u[i] > 0.0 ? std::log(f.u[i]) : f.log_u[i - s0];
      }
      for (std::size_t i = m; i < f.size(); ++i) f.u[i] = std::exp(f.log_u[i - s0]);
    }
    sanitize(m);
  }

  void sanitize(std::size_t m) {
    double* u = f.u.data();
    const std::size_t n = f.has_log_tail() ? f.size() : std::min(f.size(), m + 1);
    const double top = upper + kUpperSlack;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = u[i];
      if (v < DBL_MIN) {
        if (!(v > -kNegativeNoise)) {
          throw NumericalError("solution left [0, plateau] at " + where(f.t, x_at(i), v));
        }
        u[i] = 0.0;
      } else if (!(v <= top)) {
        throw NumericalError("solution left [0, plateau] at " + where(f.t, x_at(i), v));
      }
    }
  }

  // ---- window ------------------------------------------------------------

  std::int64_t lattice_floor(double x) const {
    return static_cast<std::int64_t>(std::floor(x / dx() + 1e-9));
  }

  double plateau_at(double x) const {
    if (sc.mode == DomainMode::ShiftingEnvironment) {
      return x <= sc.env.shift(f.t) ? 1.0 - sc.env.a : 1.0;
    }
    return sc.R;
  }

  double front_low() const {
    const double b = 0.01 * sc.plateau();
    const double xi = level_set(f, b);
    if (xi == kNoCrossing) {
      throw NumericalError("front lost: no crossing of u = " + std::to_string(b) + " at t=" +
                           std::to_string(f.t));
    }
    return xi;
  }

  void append_cells(std::size_t count) {
    const std::size_t n0 = f.size();
    f.u.resize(n0 + count, 0.0);
    if (f.has_log_tail()) {
      std::vector<double>& l = f.log_u;
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t L = l.size();
        l.push_back(2.0 * l[L - 1] - l[L - 2]);
        f.u[n0 + k] = std::exp(l.back());
      }
    } else if (std::holds_alternative<TailInitialData>(sc.initial)) {
      for (std::size_t k = 0; k < count; ++k) {
        const double v = right_value(f.t, x_at(n0 + k));
        f.u[n0 + k] = v < DBL_MIN ? 0.0 : v;
      }
    }
  }

  void drop_cells(std::size_t count, bool check) {
    if (check) {
      const double X = sc.shift(f.t);
      for (std::size_t i = 0; i < count; ++i) {
        const double x = x_at(i);
        if (std::isfinite(X) && std::abs(x - X) < 0.5 * sc.solver.left_margin) continue;
        const double dev = std::abs(f.u[i] - plateau_at(x));
        diag.max_plateau_deviation = std::max(diag.max_plateau_deviation, dev);
        if (dev > kPlateauTolerance) {
          throw NumericalError("plateau not reached in dropped cell " + where(f.t, x, f.u[i]));
        }
      }
    }
    f.u.erase(f.u.begin(), f.u.begin() + static_cast<std::ptrdiff_t>(count));
    f.first_index += static_cast<std::int64_t>(count);
    diag.cells_dropped += static_cast<std::int64_t>(count);
  }

  void update_log_tail(double front) {
    if (sc.solver.tail_mode != TailMode::LogPatch) return;
    const double thresh = sc.solver.u_switch;
    const std::size_t n = f.size();
    std::size_t start = static_cast<std::size_t>(
        std::clamp<std::int64_t>(lattice_floor(front) - f.first_index, 1, static_cast<std::int64_t>(n) - 1));
    std::size_t s = start;
    while (s < n && f.u[s] >= thresh) ++s;
    if (s + 3 * kLogOverlap >= n || s < 2) return;
    if (!f.has_log_tail()) {
      // Activate once the tail is resolved well below the switch value.
      std::size_t k = s;
      while (k < n && f.u[k] > 1e-200) ++k;
      if (k < s + 2 * kLogOverlap || k < 2) return;
      const double slope = (std::log(f.u[k - 1]) - std::log(f.u[s])) / static_cast<double>(k - 1 - s);
      f.log_u.assign(n - s, 0.0);
      for (std::size_t i = s; i < n; ++i) {
        f.log_u[i - s] =
            i < k ? std::log(f.u[i]) : std::log(f.u[k - 1]) + slope * static_cast<double>(i - (k - 1));
      }
      f.log_first_index = f.first_index + static_cast<std::int64_t>(s);
      return;
    }
    const std::size_t s_old = static_cast<std::size_t>(f.log_first_index - f.first_index);
    if (s > s_old + 4 * kLogOverlap) {
      const std::size_t move = s - s_old - 2 * kLogOverlap;
      f.log_u.erase(f.log_u.begin(), f.log_u.begin() + static_cast<std::ptrdiff_t>(move));
      f.log_first_index += static_cast<std::int64_t>(move);
    }
  }

  void recentre() {
    const double h = dx();
    const double t = f.t;
    const double front = front_low();
    const double desired_lo = front - sc.solver.left_margin;

    if (sc.mode == DomainMode::GrowingDomain) {
      grow_to(t);
    } else {
      const double X = sc.shift(t);
      const double ahead = std::isfinite(X) ? std::max(X, front) : front;
      const double desired_hi = ahead + sc.solver.window_kappa * std::sqrt(t + 1.0);
      if (f.x_hi() < desired_hi) {
        const std::int64_t need = lattice_floor(desired_hi) + 1 -
                                  (f.first_index + static_cast<std::int64_t>(f.size()) - 1);
        append_cells(static_cast<std::size_t>(std::max<std::int64_t>(need, 0)) + kExtendChunk);
      }
    }

    const double excess = (desired_lo - f.x_lo()) / h;
    if (excess >= static_cast<double>(kDropChunk)) {
      std::size_t count = static_cast<std::size_t>(excess);
      if (f.has_log_tail()) {
        const std::size_t s0 = static_cast<std::size_t>(f.log_first_index - f.first_index);
        count = std::min(count, s0 > 2 ? s0 - 2 : 0);
      }
      if (count > 0) drop_cells(count, t >= sc.solver.burn_in);
    }
    update_log_tail(front);
    diag.max_window = std::max(diag.max_window, f.size());
  }
};

// ---------------------------------------------------------------------------

Field init_field(const Scenario& scenario) {
  scenario.validate();
  const SolverConfig& s = scenario.solver;
  const double h = s.dx;
  const double top = scenario.plateau();
  Field f;
  f.t = 0.0;
  f.dx = h;
  auto floor_index = [h](double x) { return static_cast<std::int64_t>(std::floor(x / h + 1e-9)); };
  auto ceil_index = [h](double x) { return static_cast<std::int64_t>(std::ceil(x / h - 1e-9)); };

  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::function<double(double)> value;

  if (scenario.mode == DomainMode::GrowingDomain) {
    const double g = scenario.growing.g_front.value_or(scenario.R);
    lo = floor_index(-s.left_margin);
    hi = 0;
    value = [g, &scenario](double x) {
      return x < 0.0 ? g : scenario.growing.boundary_value(0.0, 0.0, scenario.R);
    };
  } else if (const auto* hv = std::get_if<HeavisideFront>(&scenario.initial)) {
    const double xf = hv->x_front;
    const double X0 = scenario.shift(0.0);
    const double ahead = std::isfinite(X0) ? std::max(xf, X0) : xf;
    lo = floor_index(xf - s.left_margin);
    hi = ceil_index(ahead + s.window_kappa) + 1;
    const EnvironmentSpec env = scenario.env;
    const bool shifting = scenario.mode == DomainMode::ShiftingEnvironment;
    const double R = scenario.R;
    value = [xf, X0, env, shifting, R, h](double x) {
      const double behind = shifting ? (x <= X0 ? 1.0 - env.a : 1.0) : R;
      return behind * std::clamp((xf + h - x) / (2.0 * h), 0.0, 1.0);
    };
  } else if (const auto* tail = std::get_if<TailInitialData>(&scenario.initial)) {
    const double xf = tail->pure_exponential ? 0.0 : tail->x0;
    lo = floor_index(xf - s.left_margin);
    hi = ceil_index(xf + std::log(1e4) / tail->lambda + s.window_kappa) + 1;
    TailInitialData data = *tail;
    if (!data.front_value && !data.pure_exponential) data.front_value = top;
    value = [data, top](double x) { return std::min(top, data(x)); };
  } else {
    const auto& samples = std::get<ExplicitSamples>(scenario.initial);
    lo = static_cast<std::int64_t>(std::llround(samples.x_lo / h));
    hi = lo + static_cast<std::int64_t>(samples.values.size()) - 1;
    f.first_index = lo;
    f.u = samples.values;
    return f;
  }
  if (hi <= lo + 4) throw ConfigError("window policy cannot be satisfied at t = 0");
  f.first_index = lo;
  f.u.resize(static_cast<std::size_t>(hi - lo + 1));
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    const double v = value(f.x(i));
    f.u[i] = v < DBL_MIN ? 0.0 : v;
  }
  return f;
}

Solver::Solver(Scenario scenario) {
  Field f = init_field(scenario);
  impl_ = std::make_unique<Impl>(std::move(scenario), std::move(f));
}

Solver::Solver(Scenario scenario, Field field) {
  scenario.validate();
  if (std::abs(field.dx - scenario.solver.dx) > 1e-15 * scenario.solver.dx) {
    throw ConfigError("field dx does not match the solver dx");
  }
  if (field.size() < 4) throw ConfigError("field window must hold at least 4 cells");
  impl_ = std::make_unique<Impl>(std::move(scenario), std::move(field));
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

const Field& Solver::field() const noexcept { return impl_->f; }
const Scenario& Solver::scenario() const noexcept { return impl_->sc; }
const RunDiagnostics& Solver::diagnostics() const noexcept { return impl_->diag; }

void Solver::step_only(double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  FlushDenormals guard;
  impl_->advance_field(dt);
}

void Solver::recentre() { impl_->recentre(); }

void Solver::advance() {
  step_only(impl_->sc.solver.dt);
  impl_->recentre();
}

Field step(const Field& field, const Scenario& scenario, double dt) {
  Solver solver(scenario, field);
  solver.step_only(dt);
  return solver.field();
}

namespace {

double interpolate_log(const Field& f, double x) {
  const double pos = x / f.dx - static_cast<double>(f.first_index);
  if (pos < 0.0 || pos > static_cast<double>(f.size() - 1)) return kNaN;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), f.size() - 2);
  const double w = pos - static_cast<double>(i);
  if (f.has_log_tail()) {
    const std::int64_t gi = f.first_index + static_cast<std::int64_t>(i);
    if (gi >= f.log_first_index) {
      const std::size_t k = static_cast<std::size_t>(gi - f.log_first_index);
      if (k + 1 < f.log_u.size()) return std::exp((1.0 - w) * f.log_u[k] + w * f.log_u[k + 1]);
    }
  }
  const double a = f.u[i];
  const double b = f.u[i + 1];
  if (a > 0.0 && b > 0.0) return std::exp((1.0 - w) * std::log(a) + w * std::log(b));
  return (1.0 - w) * a + w * b;
}

void record(const Scenario& sc, const Field& f, std::vector<FrontTrace>& traces) {
  const double X = sc.shift(f.t);
  const double uX = std::isfinite(X) ? interpolate_log(f, X) : kNaN;
  for (FrontTrace& tr : traces) tr.push(f.t, level_set(f, tr.level), uX, X);
}

}  // namespace

RunResult run(const Scenario& scenario, const RunObserver& observer) {
  RunResult result;
  run(scenario, result, observer);
  return result;
}

void run(const Scenario& scenario, RunResult& result, const RunObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  result = RunResult{};
  Solver solver(scenario);
  const Scenario& sc = solver.scenario();
  const double dt = sc.solver.dt;
  const double T = sc.horizon;

  for (double b : sc.trace_levels()) {
    FrontTrace tr;
    tr.level = b;
    result.traces.push_back(std::move(tr));
  }
  const std::int64_t cadence =
      std::max<std::int64_t>(1, std::llround(sc.observers.trace_cadence / dt));
  std::vector<std::int64_t> snap_steps;
  for (double ts : sc.observers.snapshot_times) {
    if (ts >= 0.0 && ts <= T + 1e-9) snap_steps.push_back(std::llround(ts / dt));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](std::int64_t n) {
    while (next_snap < snap_steps.size() && snap_steps[next_snap] <= n) {
      if (snap_steps[next_snap] == n) result.snapshots.push_back(solver.field());
      ++next_snap;
    }
  };
  take_snapshots(0);

  const std::int64_t n_full = static_cast<std::int64_t>(std::floor(T / dt + 1e-9));
  const std::int64_t recentre_every = std::max<std::int64_t>(1, std::llround(0.25 / dt));
  solver.recentre();
  bool stopped = false;
  for (std::int64_t n = 1; n <= n_full && !stopped; ++n) {
    solver.step_only(dt);
    const bool sample = n % cadence == 0;
    if (n % recentre_every == 0 || sample || n == n_full) solver.recentre();
    if (sample) {
      record(sc, solver.field(), result.traces);
      if (observer && !observer(solver.field())) stopped = true;
    }
    take_snapshots(n);
  }
  const double rest = T - solver.field().t;
  if (!stopped && rest > 1e-9 * dt) {
    solver.step_only(rest);
    solver.recentre();
    record(sc, solver.field(), result.traces);
  }
  result.final_field = solver.field();
  result.diagnostics = solver.diagnostics();
  result.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace kpplab
