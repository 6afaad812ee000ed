#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "kpplab/asymptotics.hpp"
#include "kpplab/errors.hpp"
#include "kpplab/front_analysis.hpp"
#include "kpplab/linear_oracle.hpp"
#include "kpplab/pde_solver.hpp"

using namespace kpplab;

namespace {

// Forward Euler, 3-point Laplacian, Neumann on the left, zero on the right, with
// the same cell-fraction weighting of the growth deficit.
std::vector<double> explicit_reference(const EnvironmentSpec& env, double x_lo, double dx,
                                       std::vector<double> u, double T, double dt) {
  const std::size_t n = u.size();
  std::vector<double> next(n);
  const int steps = static_cast<int>(std::lround(T / dt));
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const double X = env.shift(t);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = x_lo + dx * static_cast<double>(i);
      const double frac = std::clamp((X - (x - 0.5 * dx)) / dx, 0.0, 1.0);
      const double r = 1.0 - env.a * frac;
      const double left = i == 0 ? u[1] : u[i - 1];
      const double right = i + 1 == n ? 0.0 : u[i + 1];
      next[i] = u[i] + dt * ((left - 2.0 * u[i] + right) / (dx * dx) + u[i] * (r - u[i]));
    }
    u.swap(next);
  }
  return u;
}

Scenario classical(double T) {
  Scenario sc;
  sc.env = {0.0, 0.0, 0.0};
  sc.horizon = T;
  return sc;
}

double front_at_end(const Scenario& sc) { return run(sc).trace().xi.back(); }

}  // namespace

TEST(InitField, Heaviside) {
  Scenario sc = classical(10.0);
  sc.initial = HeavisideFront{0.0};
  const Field f = init_field(sc);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.x(i);
    if (x < -2.0 * f.dx) EXPECT_DOUBLE_EQ(f.u[i], 1.0);
    if (x > 2.0 * f.dx) EXPECT_DOUBLE_EQ(f.u[i], 0.0);
  }
  EXPECT_LT(f.x_lo(), 0.0);
  EXPECT_GT(f.x_hi(), 0.0);
}

TEST(InitField, TailData) {
  Scenario sc = classical(10.0);
  sc.mode = DomainMode::WholeLine;
  TailInitialData d;
  d.q = 1.0;
  d.lambda = 0.5;
  d.x0 = 1.0;
  sc.initial = d;
  const Field f = init_field(sc);
  const double x = 4.0;
  const auto i = static_cast<std::size_t>(std::lround(x / f.dx) - f.first_index);
  ASSERT_LT(i, f.size());
  EXPECT_NEAR(f.u[i], 0.5413411, 1e-7);
}

TEST(Step, ZeroIsEquilibrium) {
  Scenario sc = classical(10.0);
  sc.initial = ExplicitSamples{-20.0, std::vector<double>(800, 0.0)};
  Field f = init_field(sc);
  std::fill(f.u.begin(), f.u.end(), 0.0);
  for (int k = 0; k < 10; ++k) f = step(f, sc, sc.solver.dt);
  for (double v : f.u) EXPECT_EQ(v, 0.0);
}

TEST(Step, PlateauIsEquilibrium) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = 10.0;
  Field f = init_field(sc);
  f.first_index -= 100000;  // the whole window sits far behind X(t)
  std::fill(f.u.begin(), f.u.end(), 0.5);
  for (int k = 0; k < 5; ++k) {
    Field g = step(f, sc, sc.solver.dt);
    double worst = 0.0;
    for (std::size_t i = 0; i + 200 < g.size(); ++i) worst = std::max(worst, std::abs(g.u[i] - 0.5));
    EXPECT_LT(worst, 1e-14);
    f = std::move(g);
  }
}

TEST(Step, LinearGrowthMatchesOracle) {
  // Small data: u ~ psi for the heat equation with growth 1.
  Scenario sc = classical(1.0);
  sc.mode = DomainMode::WholeLine;
  const double eps = 1e-8;
  const double dx = sc.solver.dx;
  std::vector<double> v;
  const double x_lo = -30.0;
  for (double x = x_lo; x <= 30.0 + 1e-9; x += dx) v.push_back(eps * std::exp(-x * x));
  sc.initial = ExplicitSamples{x_lo, v};
  sc.solver.startup_steps = 0;
  Field f = init_field(sc);
  const double dt = 0.002;
  for (int k = 0; k < 100; ++k) f = step(f, sc, dt);
  const double t = 100 * dt;
  // Exact solution of u_t = u_xx + u with u0 = eps e^{-x^2}.
  for (std::size_t i = 0; i < f.size(); i += 20) {
    const double x = f.x(i);
    if (std::abs(x) > 3.0) continue;
    const double exact = eps * std::exp(t) / std::sqrt(1.0 + 4.0 * t) * std::exp(-x * x / (1.0 + 4.0 * t));
    EXPECT_NEAR(f.u[i] / exact, 1.0, 1e-4) << x;
  }
}

TEST(Run, AgreesWithExplicitReference) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = 5.0;
  sc.solver.window_kappa = 40.0;
  const double dx = sc.solver.dx;
  const double x_lo = -60.0;
  std::vector<double> u0;
  for (double x = x_lo; x <= 60.0 + 1e-9; x += dx) u0.push_back(0.5 / (1.0 + std::exp(2.0 * x)));
  sc.initial = ExplicitSamples{x_lo, u0};
  const RunResult r = run(sc);
  const std::vector<double> ref = explicit_reference(sc.env, x_lo, dx, u0, 5.0, 0.2 * dx * dx);
  double worst = 0.0;
  const Field& f = r.final_field;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto j = static_cast<long>(std::lround((f.x(i) - x_lo) / dx));
    if (j < 0 || j >= static_cast<long>(ref.size())) continue;
    worst = std::max(worst, std::abs(f.u[i] - ref[static_cast<std::size_t>(j)]));
  }
  EXPECT_LT(worst, 2e-3);
}

TEST(Run, ClassicalSpeedExample) {
  const RunResult r = run(classical(100.0));
  const double ratio = r.trace().xi.back() / 100.0;
  EXPECT_GE(ratio, 1.9);
  EXPECT_LE(ratio, 2.0);
}

TEST(Run, StaysWithinBounds) {
  Scenario sc;
  sc.env = {0.5, 2.2, 1.0};
  sc.horizon = 60.0;
  bool ok = true;
  run(sc, [&](const Field& f) {
    for (double v : f.u) ok = ok && v >= 0.0 && v <= 0.5 + 1e-12;
    return true;
  });
  EXPECT_TRUE(ok);
}

TEST(Run, Deterministic) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = 40.0;
  const RunResult a = run(sc);
  const RunResult b = run(sc);
  ASSERT_EQ(a.trace().size(), b.trace().size());
  for (std::size_t i = 0; i < a.trace().size(); ++i) {
    EXPECT_EQ(a.trace().xi[i], b.trace().xi[i]);
    EXPECT_EQ(a.trace().u_at_shift[i], b.trace().u_at_shift[i]);
  }
}

TEST(Run, WindowPolicyIndependent) {
  Scenario sc;
  sc.env = {0.5, 2.2, 0.0};
  sc.horizon = 50.0;
  const double base = front_at_end(sc);
  sc.solver.window_kappa *= 2.0;
  EXPECT_LT(std::abs(front_at_end(sc) - base), 1e-6);
}

TEST(Run, GridConvergence) {
  auto at = [](double dx) {
    Scenario sc = classical(20.0);
    sc.solver.dx = dx;
    sc.solver.dt = 0.01;
    return front_at_end(sc);
  };
  const double a = at(0.2);
  const double b = at(0.1);
  const double c = at(0.05);
  const double d1 = std::abs(a - b);
  const double d2 = std::abs(b - c);
  // At least second order in dx.
  EXPECT_GE(d1, 4.0 * d2 * 0.9);
}

TEST(Run, TimeConvergence) {
  auto at = [](double dt) {
    Scenario sc = classical(20.0);
    sc.solver.dt = dt;
    return front_at_end(sc);
  };
  const double a = at(0.08);
  const double b = at(0.04);
  const double c = at(0.02);
  EXPECT_GT(std::abs(a - b) / std::abs(b - c), 3.0);
}

TEST(Run, BelowLinearOracle) {
  Scenario sc = classical(40.0);
  sc.mode = DomainMode::WholeLine;
  TailInitialData d;
  d.q = 0.0;
  d.lambda = 0.5;
  d.front_value = 1.0;
  sc.initial = d;
  const RunResult r = run(sc);
  const Field& f = r.final_field;
  const double slack = 1.0 + 5.0 * (sc.solver.dx * sc.solver.dx + sc.solver.dt);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.u[i] >= 1e-4 || f.u[i] <= 1e-250) continue;
    const double psi = psi_eval(f.t, f.x(i), 1.0, d);
    EXPECT_LE(f.u[i], psi * slack) << f.x(i);
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(Run, TailRatioTendsToOne) {
  for (double T : {20.0, 40.0}) {
    Scenario sc = classical(T);
    sc.mode = DomainMode::WholeLine;
    TailInitialData d;
    d.q = 0.0;
    d.lambda = 0.5;
    d.front_value = 1.0;
    sc.initial = d;
    const RunResult r = run(sc);
    OracleRegion region;
    region.m = wave_speed(0.5, 1.0) * T;
    region.z_lo = 2.0 * 0.3 * T;
    const RatioStats s =
        ratio_to_oracle(r.final_field, [&d](double t, double x) { return psi_eval(t, x, 1.0, d); }, region);
    EXPECT_GT(s.count, 0u);
    EXPECT_GE(s.min, 0.95) << T;
    EXPECT_LE(s.max, 1.01) << T;
  }
}

TEST(Run, GrowingDomainNoLogDrift) {
  Scenario sc;
  sc.mode = DomainMode::GrowingDomain;
  sc.growing.lambda = 0.5;
  sc.growing.q = 0.0;
  sc.horizon = 200.0;
  const RunResult r = run(sc);
  FitOptions o;
  o.c = wave_speed(0.5, 1.0);
  o.t_lo = 50.0;
  o.t_hi = 200.0;
  EXPECT_LT(std::abs(fit_delay(r.trace(), o).theta_hat), 0.15);
  for (double v : r.final_field.u) EXPECT_LE(v, 1.0 + 1e-12);
}

TEST(GrowingDomain, BoundaryValue) {
  GrowingDomainSpec g;
  g.lambda = 0.5;
  g.q = 1.0;
  EXPECT_NEAR(g.boundary_value(1.0, 10.0, 1.0), 9.0 * std::exp(-5.0 + 1.25), 1e-14);
  EXPECT_DOUBLE_EQ(g.boundary_value(1.0, 3.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(g.boundary(2.0), 6.0);
}

TEST(Scenario, ProblemsListed) {
  Scenario sc;
  sc.horizon = -1.0;
  sc.solver.dx = 0.0;
  sc.solver.dt = -0.1;
  const auto p = sc.problems();
  EXPECT_GE(p.size(), 3u);
  EXPECT_THROW(sc.validate(), ConfigError);
  EXPECT_TRUE(classical(10.0).problems().empty());
}

TEST(Scenario, ImexStepLimit) {
  Scenario sc = classical(10.0);
  sc.solver.scheme = TimeScheme::Imex;
  sc.solver.dt = 2.0 * sc.solver.dx;
  EXPECT_FALSE(sc.problems().empty());
}

TEST(Scenario, CompactStepFloor) {
  Scenario sc = classical(10.0);
  sc.solver.dx = 0.2;
  sc.solver.dt = 0.005;
  EXPECT_FALSE(sc.problems().empty());
  sc.solver.scheme = TimeScheme::CrankNicolsonNewton;
  EXPECT_TRUE(sc.problems().empty());
}

TEST(Schemes, AgreeOnFrontPosition) {
  auto at = [](TimeScheme s, double dt, double dx) {
    Scenario sc;
    sc.env = {0.5, 2.2, 0.0};
    sc.horizon = 30.0;
    sc.solver.scheme = s;
    sc.solver.dt = dt;
    sc.solver.dx = dx;
    return front_at_end(sc);
  };
  const double strang = at(TimeScheme::StrangCompact, 0.02, 0.05);
  const double c1 = at(TimeScheme::CrankNicolsonNewton, 0.02, 0.05);
  const double c2 = at(TimeScheme::CrankNicolsonNewton, 0.01, 0.05);
  const double c3 = at(TimeScheme::CrankNicolsonNewton, 0.005, 0.05);
  EXPECT_NEAR(c2, strang, 0.02);
  EXPECT_GT(std::abs(c1 - c2), 3.0 * std::abs(c2 - c3));
  EXPECT_NEAR(at(TimeScheme::Imex, 0.005, 0.05), strang, 0.05);
}

TEST(Solver, StepOnlyKeepsWindow) {
  Solver s(classical(10.0));
  const auto first = s.field().first_index;
  const auto n = s.field().size();
  s.step_only(0.01);
  EXPECT_EQ(s.field().first_index, first);
  EXPECT_EQ(s.field().size(), n);
  EXPECT_NEAR(s.field().t, 0.01, 1e-15);
}
