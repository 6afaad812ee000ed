#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kpplab/asymptotics.hpp"
#include "kpplab/errors.hpp"
#include "kpplab/traveling_wave.hpp"

using namespace kpplab;

namespace {

const double kAzLambda = 2.0 / std::sqrt(6.0);

double az_exact(double z) { return std::pow(1.0 + std::exp(z / std::sqrt(6.0)), -2.0); }

const WaveProfile& az() {
  static const WaveProfile w = compute_profile(kAzLambda, 1.0);
  return w;
}

}  // namespace

TEST(TravelingWave, ClosedFormOracle) {
  double worst = 0.0;
  for (int k = -30000; k <= 30000; k += 7) {
    const double z = 1e-3 * k;
    worst = std::max(worst, std::abs(az()(z) - az_exact(z)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(TravelingWave, Metadata) {
  EXPECT_DOUBLE_EQ(az().lambda(), kAzLambda);
  EXPECT_DOUBLE_EQ(az().R(), 1.0);
  EXPECT_NEAR(az().speed(), wave_speed(kAzLambda, 1.0), 1e-15);
  EXPECT_EQ(az().normalization(), WaveNormalization::Supercritical);
  EXPECT_EQ(compute_profile(1.0, 1.0).normalization(), WaveNormalization::Critical);
}

TEST(TravelingWave, PlateauReached) {
  EXPECT_GT(az()(-40.0), 0.999);
  EXPECT_GT(az().samples().front(), 1.0 - 1e-6);
}

TEST(TravelingWave, TailNormalization) {
  // e^{lambda z} Phi(z) - 1 decays to zero; exact for the closed-form wave.
  for (double lam : {0.3, 0.5, kAzLambda, 0.9}) {
    const WaveProfile w = compute_profile(lam, 1.0);
    auto dev = [&](double z) { return std::abs(std::exp(lam * z) * w(z) - 1.0); };
    const double zmax = w.z_max();
    EXPECT_LT(dev(zmax), 1e-3) << lam;
    EXPECT_LT(dev(zmax), dev(0.5 * zmax)) << lam;
    EXPECT_LT(dev(4.0 * zmax), 1e-6) << lam;
  }
  const double zmax = az().z_max();
  EXPECT_NEAR(std::exp(kAzLambda * zmax) * az()(zmax), std::exp(kAzLambda * zmax) * az_exact(zmax), 1e-6);
}

TEST(TravelingWave, GridNodesAreStoredSamples) {
  const auto s = az().samples();
  for (std::size_t k : {std::size_t{0}, std::size_t{1000}, s.size() / 2, s.size() - 1}) {
    EXPECT_DOUBLE_EQ(az()(az().z(k)), s[k]);
  }
}

TEST(TravelingWave, MonotoneDecreasingToZero) {
  double prev = az()(-50.0);
  for (double z = -49.5; z <= 200.0; z += 0.5) {
    const double v = az()(z);
    EXPECT_LE(v, prev) << z;
    EXPECT_GE(v, 0.0);
    prev = v;
  }
  EXPECT_LT(az()(200.0), 1e-60);
}

TEST(TravelingWave, EvaluateExample) {
  EXPECT_NEAR(az()(std::sqrt(6.0) * std::log(3.0)), 0.0625, 1e-7);
}

TEST(TravelingWave, InverseLevel) {
  EXPECT_NEAR(az().inverse_level(0.25), 0.0, 1e-6);
  EXPECT_NEAR(az().inverse_level(0.0625), std::sqrt(6.0) * std::log(3.0), 1e-6);
  EXPECT_LT(az().inverse_level(0.9), 0.0);
  EXPECT_THROW(az().inverse_level(0.0), DomainError);
  EXPECT_THROW(az().inverse_level(1.0), DomainError);
  EXPECT_THROW(az().inverse_level(-0.2), DomainError);
}

TEST(TravelingWave, InverseRoundTrip) {
  for (double b : {0.01, 0.1, 0.3, 0.5, 0.7, 0.99}) EXPECT_NEAR(az()(az().inverse_level(b)), b, 1e-10);
}

TEST(TravelingWave, TranslationConsistency) {
  // Sampling Phi(z - s) and locating a level recovers the shift.
  for (double s : {-3.3, 0.0, 1.25, 17.0}) {
    for (double b : {0.1, 0.5, 0.8}) {
      const double z0 = az().inverse_level(b);
      double lo = z0 + s - 5.0;
      double hi = z0 + s + 5.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (az()(mid - s) > b ? lo : hi) = mid;
      }
      EXPECT_NEAR(0.5 * (lo + hi) - z0, s, 1e-9);
    }
  }
}

TEST(TravelingWave, SecondOrderResidual) {
  WaveOptions coarse;
  coarse.dz = 0.02;
  WaveOptions fine = coarse;
  fine.dz = 0.01;
  const double r1 = ode_residual(compute_profile(0.5, 1.0, coarse));
  const double r2 = ode_residual(compute_profile(0.5, 1.0, fine));
  const double ratio = r1 / r2;
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

TEST(TravelingWave, OtherPlateaus) {
  // Phi_{lambda,R}(z) = R Phi_{lambda/sqrt(R),1}(sqrt(R) z) after the tail is renormalised.
  const double R = 0.5;
  const double lam = kAzLambda * std::sqrt(R);
  const WaveProfile w = compute_profile(lam, R);
  const double shift = std::log(R) / lam;  // e^{lam z} Phi -> 1 fixes the translate
  for (double z = -20.0; z <= 30.0; z += 0.25) {
    const double expected = R * az_exact(std::sqrt(R) * (z + shift));
    EXPECT_NEAR(w(z), expected, 2e-6) << z;
  }
}

TEST(TravelingWave, CriticalLeadingOrder) {
  // z^{-1} e^{z} Phi = 1 + k / z + o(1/z): the leading coefficient is normalised.
  const WaveProfile w = compute_profile(1.0, 1.0);
  const double k = w.tail_coefficient();
  for (double z : {20.0, 30.0, 40.0, 80.0}) {
    EXPECT_NEAR(std::exp(z) * w(z) / z, 1.0 + k / z, 1e-4) << z;
  }
}

TEST(TravelingWave, CriticalRatioFarOut) {
  // 1 + k/z enters [0.99, 1.01] once z exceeds 100 |k|.
  const WaveProfile w = compute_profile(1.0, 1.0);
  const double k = w.tail_coefficient();
  for (double z = 100.0 * std::abs(k) + 1.0; z <= 400.0; z += 5.0) {
    const double r = std::exp(z) * w(z) / z;
    EXPECT_GE(r, 0.99);
    EXPECT_LE(r, 1.01);
  }
}

TEST(TravelingWave, DomainErrors) {
  EXPECT_THROW(compute_profile(1.1, 1.0), DomainError);
  EXPECT_THROW(compute_profile(0.0, 1.0), DomainError);
  EXPECT_THROW(compute_profile(0.5, -1.0), DomainError);
}

TEST(TravelingWave, CsvExport) {
  std::ostringstream out;
  az().write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# kpplab-csv v1");
  std::getline(in, line);
  EXPECT_EQ(line, "z,phi");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, az().samples().size());
}
