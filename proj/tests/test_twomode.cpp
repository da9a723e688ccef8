#include <gtest/gtest.h>

#include <random>

#include "qnd/twomode.hpp"

using namespace qnd;

namespace {

double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

/// Eigenvalues of the 2x2 optical matrix at a static displacement x.
std::pair<double, double> optical_branches(const TwoModeParams& p, double x) {
  Eigen::Matrix2d m;
  m << p.omega_1 + p.G1_a1 * x, p.nu, p.nu, p.omega_2 + p.G1_a2 * x;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  return {es.eigenvalues()(1), es.eigenvalues()(0)};
}

}  // namespace

TEST(Supermodes, TransformIsUnitary) {
  const Matrix u = supermode_transform(4).matrix();
  EXPECT_LT((u * u.adjoint() - Matrix::Identity(12, 12)).norm(), 1e-15);
}

TEST(Supermodes, RotationReproducesSupermodeForm) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto p = TwoModeParams::degenerate(50 + u(rng), 1 + u(rng), 3 * u(rng), 3 * u(rng), 2 * u(rng), 2 * u(rng));
    const double wm = 2 + u(rng), xz = 0.3;
    const int d = 5;
    const Matrix U = supermode_transform(d).matrix();
    const Matrix rotated = U * two_mode_hamiltonian(p, wm, xz, d).matrix() * U.adjoint();
    EXPECT_LT(rel_diff(rotated, supermode_hamiltonian(p, wm, xz, d).matrix()), 1e-14);
  }
}

TEST(Supermodes, SpecialCasesReduceToNamedForms) {
  const double w0 = 40, nu = 0.7, G1 = 1.3, G2 = 0.4, wm = 3, xz = 0.2;
  const int d = 6;
  EXPECT_LT(rel_diff(supermode_hamiltonian(TwoModeParams::mim(w0, nu, G1), wm, xz, d).matrix(),
                     mim_hamiltonian(w0, nu, G1, wm, xz, d).matrix()),
            1e-15);
  EXPECT_LT(rel_diff(supermode_hamiltonian(TwoModeParams::wgm(w0, nu, G1, G2), wm, xz, d).matrix(),
                     wgm_hamiltonian(w0, nu, G1, G2, wm, xz, d).matrix()),
            1e-15);
  const FockOperator h = mim_hamiltonian(w0, nu, G1, wm, xz, d);
  EXPECT_LT((h.matrix() - h.matrix().adjoint()).norm(), 1e-15);
}

TEST(Supermodes, NonDegenerateRejected) {
  TwoModeParams p = TwoModeParams::mim(10, 1, 1);
  p.omega_2 = 11;
  EXPECT_THROW(supermode_hamiltonian(p, 1, 1, 3), DomainError);
  const FockOperator h = two_mode_hamiltonian(p, 1, 1, 3);
  EXPECT_EQ(h.dim(), 9);
}

TEST(AvoidedCrossing, BranchesMatchOpticalEigenvalues) {
  const auto p = TwoModeParams::mim(100.0, 0.5, 2.0);
  for (double x : {-1.0, -0.1, 0.0, 0.03, 0.7, 5.0}) {
    const auto b = mim_frequencies(p, x);
    const auto [hi, lo] = optical_branches(p, x);
    EXPECT_NEAR(b.omega_plus, hi, 1e-12);
    EXPECT_NEAR(b.omega_minus, lo, 1e-12);
  }
}

TEST(AvoidedCrossing, CurvatureGivesEffectiveQuadraticCoupling) {
  const auto p = TwoModeParams::mim(10.0, 0.5, 2.0);
  const double h = 1e-3;
  auto f = [&](double x) { return mim_frequencies(p, x).omega_plus; };
  const double d2 = (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
  EXPECT_NEAR(0.5 * d2, mim_effective_g2(p).G2_prime, 1e-6);
  EXPECT_NEAR(mim_effective_g2(p).G2_prime, 4.0, 1e-15);
}

TEST(AvoidedCrossing, QuadraticApproximationErrorIsQuartic) {
  const auto p = TwoModeParams::mim(10.0, 0.5, 2.0);
  for (double x : {1e-3, 1e-2, 3e-2}) {
    const double err = mim_frequencies_quadratic(p, x).omega_plus - mim_frequencies(p, x).omega_plus;
    const double gx = 2.0 * x;
    EXPECT_NEAR(err, std::pow(gx, 4) / (8 * std::pow(0.5, 3)), 2 * std::pow(gx, 6) / (16 * std::pow(0.5, 5)) + 1e-14);
  }
}

TEST(AvoidedCrossing, SinglePhotonCouplingAndDegeneracy) {
  const auto p = TwoModeParams::mim(10.0, 0.25, 3.0);
  const auto e = mim_effective_g2(p, 0.1);
  ASSERT_TRUE(e.g2.has_value());
  EXPECT_NEAR(*e.g2, 0.09 / 0.5, 1e-15);
  EXPECT_FALSE(mim_effective_g2(p).g2.has_value());
  EXPECT_THROW(mim_effective_g2(TwoModeParams::mim(10.0, 0.0, 3.0)), DomainError);
  EXPECT_THROW(mim_frequencies(TwoModeParams::mim(10.0, 0.0, 3.0), 0.1), DomainError);
}

TEST(Backscatter, Occupancy) {
  EXPECT_NEAR(backscatter_occupancy(0.5, 0.0, 1.0, 7.0), 7.0, 1e-14);
  EXPECT_NEAR(backscatter_occupancy(0.1, 0.3, 2.0, 10.0), 0.01 / 1.09 * 10.0, 1e-14);
  EXPECT_EQ(backscatter_occupancy(0.0, 0.0, 1.0, 5.0), 0.0);
  EXPECT_THROW(backscatter_occupancy(1.0, 0.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(backscatter_occupancy(1.0, 0.0, 1.0, -1.0), DomainError);
}

TEST(Backscatter, RegimeClassification) {
  const auto weak = single_mode_mapping(0.02, 1.0, 0.0, 100.0);
  EXPECT_EQ(weak.regime, BackscatterRegime::weak);
  ASSERT_TRUE(weak.mapping.has_value());
  EXPECT_EQ(weak.mapping->measurement_factor, 1.0);
  EXPECT_NEAR(weak.mapping->nbar, 100.0 * (1 + 0.0016), 1e-12);

  const auto strong = single_mode_mapping(10.0, 1.0, 0.0, 1.0);
  EXPECT_EQ(strong.regime, BackscatterRegime::strong);
  ASSERT_TRUE(strong.mapping.has_value());
  EXPECT_EQ(strong.mapping->measurement_factor, 0.5);

  const auto mid = single_mode_mapping(0.5, 1.0, 0.0, 1.0);
  EXPECT_EQ(mid.regime, BackscatterRegime::unclassified);
  EXPECT_FALSE(mid.mapping.has_value());
  EXPECT_EQ(mid.weak_candidate.measurement_factor, 1.0);
  EXPECT_EQ(mid.strong_candidate.measurement_factor, 0.5);
  EXPECT_STREQ(to_string(mid.regime), "unclassified");

  EXPECT_THROW(single_mode_mapping(0.5, 1.0, 0.0, 1.0, 1.0), DomainError);
}
