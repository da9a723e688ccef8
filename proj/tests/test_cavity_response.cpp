#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <limits>
#include <random>

#include "qnd/cavity_response.hpp"
#include "support/oracles.hpp"

using namespace qnd;

TEST(Susceptibility, OnResonanceIsTwoOverKappa) {
  const CavityResponse c(3.0, 0.0, 5.0);
  const auto chi = c.susceptibility(0.0);
  EXPECT_NEAR(chi.real(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(chi.imag(), 0.0);
}

TEST(Susceptibility, HalfWidthPoint) {
  const double kappa = 2.0, delta = 0.3;
  const CavityResponse c(kappa, delta, 1.0);
  const auto chi = c.susceptibility(0.5 * kappa - delta);
  EXPECT_NEAR(chi.real(), 1.0 / kappa, 1e-15);
  EXPECT_NEAR(-chi.imag(), 1.0 / kappa, 1e-15);
}

TEST(Susceptibility, RealPartGivesSpectrumAtNegativeFrequency) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double kappa = std::exp(3 * u(rng)), delta = 5 * u(rng), w = 10 * u(rng), n = 1 + 50 * (u(rng) + 1);
    const CavityResponse c(kappa, delta, n);
    EXPECT_NEAR(2 * n * c.susceptibility(w).real(), c.photon_spectral_density(-w),
                1e-12 * c.photon_spectral_density(-w));
    const double den = (w + delta) * (w + delta) + 0.25 * kappa * kappa;
    EXPECT_NEAR(c.susceptibility(w).imag(), -(w + delta) / den, 1e-12 / den);
  }
}

TEST(SpectralDensity, PeakValueAndSymmetry) {
  const CavityResponse c(4.0, 0.0, 7.0);
  EXPECT_NEAR(c.photon_spectral_density(0.0), 4 * 7.0 / 4.0, 1e-14);
  for (double w : {0.1, 1.0, 17.0, 1e6}) EXPECT_DOUBLE_EQ(c.photon_spectral_density(w), c.photon_spectral_density(-w));
}

TEST(SpectralDensity, ReferenceDesignAtMechanicalFrequency) {
  const auto p = oracle::reference_design();
  const CavityResponse c(p);
  const double ref = oracle::snn(100.0, p.kappa, 0.0, p.omega_m);
  EXPECT_NEAR(c.photon_spectral_density(p.omega_m), ref, 1e-12 * ref);
  EXPECT_NEAR(c.photon_spectral_density(p.omega_m), 1.96e-9, 0.01e-9);
}

TEST(SpectralDensity, IntegratesToPhotonNumber) {
  const double kappa = 1.3, delta = 0.4, n = 12.0;
  const CavityResponse c(kappa, delta, n);
  auto f = [&](double w) { return c.photon_spectral_density(w); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(GK::integrate(f, -inf, inf, 15, 1e-12) / oracle::kTwoPi, n, 1e-3 * n);
  // A +-50 kappa window holds the fraction (2/pi) atan(100) = 0.9936.
  const double window = GK::integrate(f, delta - 50 * kappa, delta + 50 * kappa, 15, 1e-12) / oracle::kTwoPi;
  EXPECT_NEAR(window, n * (2 / M_PI) * std::atan(100.0), 1e-9 * n);
}

TEST(SpectralDensity, BoundedByPeak) {
  const double kappa = 0.7, delta = -2.0, n = 3.0;
  const CavityResponse c(kappa, delta, n);
  const double peak = 4 * n / kappa;
  EXPECT_NEAR(c.photon_spectral_density(delta), peak, 1e-13 * peak);
  for (double w = -20; w < 20; w += 0.013)
    if (w != delta) EXPECT_LT(c.photon_spectral_density(w), peak);
}
