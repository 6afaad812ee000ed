#pragma once

// Traveling waves Phi'' + c Phi' + Phi (R - Phi) = 0, Phi(-inf) = R, Phi(+inf) = 0,
// with c = lambda + R / lambda and the tail normalisation
//   e^{lambda z} Phi(z) -> 1         (lambda < sqrt(R)),
//   z^{-1} e^{lambda z} Phi(z) -> 1  (lambda = sqrt(R)).

#include <iosfwd>
#include <span>
#include <vector>

namespace kpplab {

enum class WaveNormalization { Supercritical, Critical };

struct WaveOptions {
  /// Extended automatically when the plateau is approached slowly.
  double z_min = -40.0;
  double z_max = 40.0;
  double dz = 1e-3;
  /// Tolerance for the plateau check at z_min and the normalisation residual.
  double tol = 1e-6;
};

class WaveProfile {
 public:
  double lambda() const noexcept { return lambda_; }
  double R() const noexcept { return R_; }
  double speed() const noexcept { return c_; }
  WaveNormalization normalization() const noexcept { return normalization_; }

  double z_min() const noexcept { return z_min_; }
  double z_max() const noexcept { return z_min_ + dz_ * static_cast<double>(phi_.size() - 1); }
  double dz() const noexcept { return dz_; }
  double z(std::size_t k) const noexcept { return z_min_ + dz_ * static_cast<double>(k); }
  std::span<const double> samples() const noexcept { return phi_; }
  std::span<const double> derivative_samples() const noexcept { return dphi_; }

  /// Coefficient of the second tail term: B in e^{-lambda z}(1 + B e^{-(R/lambda - lambda) z} + ...)
  /// or k in e^{-lambda z}(z + k).
  double tail_coefficient() const noexcept { return tail_; }

  /// Phi(z) for any real z: cubic Hermite on the grid, tail expansions outside.
  double operator()(double z) const;
  double derivative(double z) const;
  /// Unique z with Phi(z) = b; DomainError unless 0 < b < R.
  double inverse_level(double b) const;

  /// `# kpplab-csv v1` header, then `z,phi` rows.
  void write_csv(std::ostream& out) const;

 private:
  friend WaveProfile compute_profile(double lambda, double R, const WaveOptions& options);

  double left_tail(double z) const;
  double left_tail_derivative(double z) const;
  double right_tail(double z) const;
  double right_tail_derivative(double z) const;

  double lambda_ = 0.0;
  double R_ = 1.0;
  double c_ = 0.0;
  WaveNormalization normalization_ = WaveNormalization::Supercritical;
  double z_min_ = 0.0;
  double dz_ = 0.0;
  std::vector<double> phi_;
  std::vector<double> dphi_;
  // Left tail R - D e^{mu z} - b2 D^2 e^{2 mu z}.
  double left_D_ = 0.0;
  double mu_ = 0.0;
  double b2_ = 0.0;
  // Right tail.
  double tail_ = 0.0;
  double a2_ = 0.0;
  bool resonant_ = false;
};

/// RK4 integration from the plateau side with the translate fixed by a fit of
/// the far-field expansion. Throws DomainError for lambda outside (0, sqrt(R)],
/// ConvergenceError if the plateau or the normalisation is not reached.
WaveProfile compute_profile(double lambda, double R, const WaveOptions& options = {});

/// Maximum of |Phi'' + c Phi' + Phi (R - Phi)| over interior nodes, with
/// centred differences of the stored samples.
double ode_residual(const WaveProfile& wave);

}  // namespace kpplab
