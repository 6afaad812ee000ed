#include "kpplab/traveling_wave.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kpplab/asymptotics.hpp"
#include "kpplab/errors.hpp"

namespace kpplab {
namespace {

struct Trajectory {
  std::vector<double> phi;
  std::vector<double> dphi;
};

// RK4 from z0 with the left-tail seed. The state is (v, v') with v = R - Phi
// while v < R/2 and (Phi, Phi') afterwards.
Trajectory integrate(double R, double c, double mu, double b2, double D, double z0, double dz,
                     std::size_t steps) {
  Trajectory tr;
  tr.phi.resize(steps + 1);
  tr.dphi.resize(steps + 1);
  const double e = std::exp(mu * z0);
  double y = D * e + b2 * D * D * e * e;
  double p = D * mu * e + 2.0 * mu * b2 * D * D * e * e;
  bool in_v = true;
  auto rhs_v = [R, c](double v, double dv) { return -c * dv + R * v - v * v; };
  auto rhs_phi = [R, c](double f, double df) { return -c * df - f * (R - f); };
  for (std::size_t k = 0;; ++k) {
    if (in_v && y >= 0.5 * R) {
      y = R - y;
      p = -p;
      in_v = false;
    }
    tr.phi[k] = in_v ? R - y : y;
    tr.dphi[k] = in_v ? -p : p;
    if (k == steps) break;
    auto acc = [&](double a, double b) { return in_v ? rhs_v(a, b) : rhs_phi(a, b); };
    const double k1y = p;
    const double k1p = acc(y, p);
    const double k2y = p + 0.5 * dz * k1p;
    const double k2p = acc(y + 0.5 * dz * k1y, k2y);
    const double k3y = p + 0.5 * dz * k2p;
    const double k3p = acc(y + 0.5 * dz * k2y, k3y);
    const double k4y = p + dz * k3p;
    const double k4p = acc(y + dz * k3y, k4y);
    y += dz / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    p += dz / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  return tr;
}

// Least squares with unit-norm columns; returns coefficients of `cols`.
Eigen::VectorXd scaled_lsq(const Eigen::MatrixXd& M, const Eigen::VectorXd& y) {
  Eigen::VectorXd scale = M.colwise().norm().transpose();
  Eigen::MatrixXd S = M;
  for (Eigen::Index j = 0; j < S.cols(); ++j) S.col(j) /= scale(j);
  Eigen::VectorXd x = S.colPivHouseholderQr().solve(y);
  return x.cwiseQuotient(scale);
}

}  // namespace

WaveProfile compute_profile(double lambda, double R, const WaveOptions& opt) {
  if (!(R > 0.0) || !(lambda > 0.0) || !std::isfinite(lambda) || !std::isfinite(R)) {
    throw DomainError("compute_profile requires lambda > 0 and R > 0");
  }
  const double lambda_min = std::sqrt(R);
  if (lambda > lambda_min * (1.0 + 1e-12)) {
    throw DomainError("compute_profile requires lambda <= sqrt(R)");
  }
  if (!(opt.z_min < 0.0 && opt.z_max > 0.0 && opt.dz > 0.0 && opt.tol > 0.0)) {
    throw DomainError("compute_profile requires z_min < 0 < z_max, dz > 0, tol > 0");
  }
  const bool critical = lambda >= lambda_min * (1.0 - 1e-12);
  if (critical) lambda = lambda_min;

  WaveProfile w;
  w.lambda_ = lambda;
  w.R_ = R;
  w.c_ = critical ? 2.0 * lambda_min : wave_speed(lambda, R);
  w.normalization_ = critical ? WaveNormalization::Critical : WaveNormalization::Supercritical;
  w.mu_ = 0.5 * (-w.c_ + std::sqrt(w.c_ * w.c_ + 4.0 * R));
  w.b2_ = -1.0 / (2.0 * w.mu_ * w.mu_ + R);
  const double gap = R / lambda - lambda;
  w.resonant_ = !critical && std::abs(2.0 * lambda * lambda - R) < 1e-8 * R;
  w.a2_ = critical ? 0.0 : (w.resonant_ ? -1.0 / lambda : 1.0 / (2.0 * lambda * lambda - R));

  // Slow plateau approach (small mu) extends the grid to the left.
  const double z_lo = std::min(opt.z_min, -(std::log(R / opt.tol) + 8.0) / w.mu_);
  const std::size_t n_grid = static_cast<std::size_t>(std::llround((opt.z_max - z_lo) / opt.dz));
  w.z_min_ = z_lo;
  w.dz_ = opt.dz;
  const double z_grid_max = z_lo + opt.dz * static_cast<double>(n_grid);
  const double fit_hi = std::max(z_grid_max, 40.0 / lambda);
  if (lambda * fit_hi > 600.0) throw DomainError("compute_profile: z_max too large, tail underflows");
  const double fit_lo = 0.5 * fit_hi;
  const std::size_t n_total =
      std::max(n_grid, static_cast<std::size_t>(std::ceil((fit_hi - z_lo) / opt.dz)));

  // Tail fit basis for e^{lambda z} Phi(z).
  auto basis = [&](double z, auto&& row) {
    if (critical) {
      row(0) = z;
      row(1) = 1.0;
    } else if (w.resonant_) {
      row(0) = 1.0;
      row(1) = z * std::exp(-lambda * z);
      row(2) = std::exp(-lambda * z);
    } else {
      row(0) = 1.0;
      row(1) = std::exp(-gap * z);
      row(2) = std::exp(-lambda * z);
    }
  };
  const Eigen::Index n_basis = critical ? 2 : 3;

  double D = 1.0;
  Trajectory tr;
  double sigma = 0.0;
  Eigen::VectorXd coef;
  for (int iter = 0; iter < 8; ++iter) {
    tr = integrate(R, w.c_, w.mu_, w.b2_, D, z_lo, opt.dz, n_total);
    for (std::size_t k = 0; k <= n_total; ++k) {
      if (!(tr.phi[k] > 0.0) || !(tr.phi[k] < R) || tr.dphi[k] >= 0.0) {
        std::ostringstream msg;
        msg << "traveling wave lost monotonicity at z=" << z_lo + opt.dz * static_cast<double>(k)
            << " (Phi=" << tr.phi[k] << ", Phi'=" << tr.dphi[k] << ")";
        throw ConvergenceError(msg.str());
      }
    }
    const std::size_t k_lo = static_cast<std::size_t>(std::ceil((fit_lo - z_lo) / opt.dz));
    const std::size_t stride = std::max<std::size_t>(1, (n_total - k_lo) / 2000);
    std::vector<std::size_t> idx;
    for (std::size_t k = k_lo; k <= n_total; k += stride) idx.push_back(k);
    Eigen::MatrixXd M(static_cast<Eigen::Index>(idx.size()), n_basis);
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double z = z_lo + opt.dz * static_cast<double>(idx[r]);
      basis(z, M.row(static_cast<Eigen::Index>(r)));
      y(static_cast<Eigen::Index>(r)) = std::exp(lambda * z) * tr.phi[idx[r]];
    }
    coef = scaled_lsq(M, y);
    const double A = coef(0);
    if (!(A > 0.0)) throw ConvergenceError("traveling wave tail fit produced a non-positive amplitude");
    sigma = std::log(A) / lambda;
    if (std::abs(sigma) < 1e-13) break;
    D *= std::exp(w.mu_ * sigma);
  }
  if (std::abs(sigma) > 1e-9) {
    throw ConvergenceError("traveling wave normalisation did not settle (translate " +
                           std::to_string(sigma) + ")");
  }

  w.left_D_ = D;
  w.phi_.assign(tr.phi.begin(), tr.phi.begin() + static_cast<std::ptrdiff_t>(n_grid) + 1);
  w.dphi_.assign(tr.dphi.begin(), tr.dphi.begin() + static_cast<std::ptrdiff_t>(n_grid) + 1);

  if (!(w.phi_.front() > R * (1.0 - opt.tol))) {
    std::ostringstream msg;
    msg << "traveling wave did not reach the plateau: Phi(z_min=" << z_lo
        << ") = " << w.phi_.front() << " <= R(1 - tol); decrease z_min";
    throw ConvergenceError(msg.str());
  }

  // Tail coefficient matched at z_max so the expansion is continuous.
  const double zm = w.z_max();
  const double scaled = std::exp(lambda * zm) * w.phi_.back();
  if (critical) {
    w.tail_ = scaled - zm;
  } else if (w.resonant_) {
    w.tail_ = (scaled - 1.0) * std::exp(lambda * zm) - w.a2_ * zm;
  } else {
    w.tail_ = (scaled - 1.0 - w.a2_ * std::exp(-lambda * zm)) * std::exp(gap * zm);
  }
  return w;
}

double WaveProfile::left_tail(double z) const {
  const double e = left_D_ * std::exp(mu_ * z);
  return R_ - e - b2_ * e * e;
}

double WaveProfile::left_tail_derivative(double z) const {
  const double e = left_D_ * std::exp(mu_ * z);
  return -mu_ * e - 2.0 * mu_ * b2_ * e * e;
}

double WaveProfile::right_tail(double z) const {
  const double lam = lambda_;
  const double base = std::exp(-lam * z);
  if (normalization_ == WaveNormalization::Critical) return (z + tail_) * base;
  if (resonant_) return base * (1.0 + (tail_ + a2_ * z) * base);
  const double gap = R_ / lam - lam;
  return base * (1.0 + tail_ * std::exp(-gap * z) + a2_ * base);
}

double WaveProfile::right_tail_derivative(double z) const {
  const double lam = lambda_;
  const double base = std::exp(-lam * z);
  if (normalization_ == WaveNormalization::Critical) return base * (1.0 - lam * (z + tail_));
  if (resonant_) {
    return -lam * base + base * base * (a2_ - 2.0 * lam * (tail_ + a2_ * z));
  }
  const double gap = R_ / lam - lam;
  return -lam * base - (lam + gap) * tail_ * base * std::exp(-gap * z) -
         2.0 * lam * a2_ * base * base;
}

double WaveProfile::operator()(double z) const {
  if (z <= z_min_) return z == z_min_ ? phi_.front() : left_tail(z);
  const double zmax = z_max();
  if (z >= zmax) return z == zmax ? phi_.back() : right_tail(z);
  const double s = (z - z_min_) / dz_;
  std::size_t k = static_cast<std::size_t>(s);
  if (k >= phi_.size() - 1) k = phi_.size() - 2;
  const double u = s - static_cast<double>(k);
  if (u == 0.0) return phi_[k];
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;
  return h00 * phi_[k] + h10 * dz_ * dphi_[k] + h01 * phi_[k + 1] + h11 * dz_ * dphi_[k + 1];
}

double WaveProfile::derivative(double z) const {
  if (z < z_min_) return left_tail_derivative(z);
  const double zmax = z_max();
  if (z > zmax) return right_tail_derivative(z);
  const double s = (z - z_min_) / dz_;
  std::size_t k = static_cast<std::size_t>(s);
  if (k >= phi_.size() - 1) k = phi_.size() - 2;
  const double u = s - static_cast<double>(k);
  const double u2 = u * u;
  const double d00 = (6.0 * u2 - 6.0 * u) / dz_;
  const double d10 = 3.0 * u2 - 4.0 * u + 1.0;
  const double d01 = (-6.0 * u2 + 6.0 * u) / dz_;
  const double d11 = 3.0 * u2 - 2.0 * u;
  return d00 * phi_[k] + d10 * dphi_[k] + d01 * phi_[k + 1] + d11 * dphi_[k + 1];
}

double WaveProfile::inverse_level(double b) const {
  if (!(b > 0.0 && b < R_)) throw DomainError("inverse_level requires 0 < b < R");
  double lo;
  double hi;
  if (b >= phi_.front()) {
    hi = z_min_;
    lo = z_min_ - 1.0;
    while ((*this)(lo) < b) lo = z_min_ - 2.0 * (z_min_ - lo);
  } else if (b <= phi_.back()) {
    lo = z_max();
    hi = lo + 1.0;
    while ((*this)(hi) > b) hi = lo + 2.0 * (hi - lo);
  } else {
    // Grid bisection on the decreasing samples.
    std::size_t a = 0;
    std::size_t c = phi_.size() - 1;
    while (c - a > 1) {
      const std::size_t m = (a + c) / 2;
      if (phi_[m] >= b) {
        a = m;
      } else {
        c = m;
      }
    }
    lo = z(a);
    hi = z(c);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) >= b) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void WaveProfile::write_csv(std::ostream& out) const {
  out << "# kpplab-csv v1\n"
      << "z,phi\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < phi_.size(); ++k) out << z(k) << ',' << phi_[k] << '\n';
}

double ode_residual(const WaveProfile& wave) {
  const auto phi = wave.samples();
  const double h = wave.dz();
  const double c = wave.speed();
  const double R = wave.R();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < phi.size(); ++k) {
    const double d2 = (phi[k + 1] - 2.0 * phi[k] + phi[k - 1]) / (h * h);
    const double d1 = (phi[k + 1] - phi[k - 1]) / (2.0 * h);
    worst = std::max(worst, std::abs(d2 + c * d1 + phi[k] * (R - phi[k])));
  }
  return worst;
}

}  // namespace kpplab
