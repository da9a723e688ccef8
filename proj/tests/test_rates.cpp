#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qnd/rates.hpp"
#include "support/oracles.hpp"

using namespace qnd;

namespace {
double hz(double w) { return w / oracle::kTwoPi; }
}

TEST(TransitionRates, GroundStateCannotEmit) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const auto p = oracle::scaled(1 + 20 * u(rng), 1e-3 * u(rng) + 1e-6, 2 * u(rng), 10 * u(rng), u(rng), u(rng),
                                  u(rng) - 0.5);
    const RateSet r = transition_rates(p, 0);
    EXPECT_EQ(r.gamma_down1, 0.0);
    EXPECT_EQ(r.gamma_down2, 0.0);
    EXPECT_DOUBLE_EQ(r.gamma_th, p.nbar_th() * p.gamma_m);
    EXPECT_EQ(transition_rates(p, 1).gamma_down2, 0.0);
  }
}

TEST(TransitionRates, MatchHandWrittenLorentzians) {
  const auto p = oracle::scaled(7.0, 1e-3, 0.4, 3.0, 0.2, 0.3, 0.25);
  auto S = [&](double w) { return oracle::snn(3.0, 1.0, 0.25, w); };
  for (int n = 0; n < 8; ++n) {
    const RateSet r = transition_rates(p, n);
    EXPECT_NEAR(r.gamma_up1, (n + 1) * 0.04 * S(-7.0), 1e-15);
    EXPECT_NEAR(r.gamma_down1, n * 0.04 * S(7.0), 1e-15);
    EXPECT_NEAR(r.gamma_up2, (n + 1) * (n + 2) * 0.09 / 4 * S(-14.0), 1e-15);
    EXPECT_NEAR(r.gamma_down2, n * (n - 1) * 0.09 / 4 * S(14.0), 1e-15);
    EXPECT_NEAR(r.gamma_th, 1e-3 * (1.4 * n + 0.4 * (n + 1)), 1e-15);
    EXPECT_DOUBLE_EQ(r.total_decoherence(), r.gamma_up1 + r.gamma_down1 + r.gamma_up2 + r.gamma_down2 + r.gamma_th);
  }
  EXPECT_THROW(transition_rates(p, -1), DomainError);
}

TEST(TransitionRates, ReferenceDesignGroundState) {
  const auto p = oracle::reference_design();
  const auto g = ground_state_rates(p);
  const double k = p.kappa, w = p.omega_m;
  const double g1_exact = p.g1 * p.g1 * oracle::snn(100, k, 0, -w);
  const double g2_exact = 2 * 0.25 * p.g2 * p.g2 * oracle::snn(100, k, 0, -2 * w);
  EXPECT_NEAR(g.gamma1_exact, g1_exact, 1e-12 * g1_exact);
  EXPECT_NEAR(g.gamma2_exact, g2_exact, 1e-12 * g2_exact);
  EXPECT_NEAR(hz(g.gamma1_exact), 30.77, 0.01);
  EXPECT_NEAR(hz(g.gamma1_approx), 31.25, 1e-9);
  EXPECT_NEAR(hz(g.gamma2_exact), 15.56, 0.01);
  EXPECT_NEAR(hz(g.gamma2_approx), 15.625, 1e-9);
  EXPECT_NEAR(hz(g.gamma_th0), 250.0, 1e-9);
  EXPECT_GT(g.gamma_th0, g.gamma1());
  EXPECT_GT(g.gamma1(), g.gamma2());
  EXPECT_FALSE(g.detuned);
}

TEST(TransitionRates, NoLinearCoupling) {
  auto p = oracle::reference_design();
  p.g1 = 0.0;
  const auto g = ground_state_rates(p);
  EXPECT_EQ(g.gamma1_exact, 0.0);
  EXPECT_EQ(g.gamma1_approx, 0.0);
}

TEST(TransitionRates, DetunedUsesExactForms) {
  auto p = oracle::reference_design();
  p.delta = 0.1 * p.kappa;
  const auto g = ground_state_rates(p);
  EXPECT_TRUE(g.detuned);
  EXPECT_EQ(g.gamma1(), g.gamma1_exact);
  EXPECT_EQ(g.gamma2(), g.gamma2_exact);
}

TEST(TransitionRates, MonotoneInFockIndex) {
  const auto p = oracle::reference_design();
  for (int n = 0; n < 20; ++n) {
    const auto a = transition_rates(p, n), b = transition_rates(p, n + 1);
    EXPECT_LE(a.gamma_up1, b.gamma_up1);
    EXPECT_LE(a.gamma_down1, b.gamma_down1);
    EXPECT_LE(a.gamma_up2, b.gamma_up2);
    EXPECT_LE(a.gamma_down2, b.gamma_down2);
    EXPECT_LE(a.gamma_th, b.gamma_th);
  }
}

TEST(TransitionRates, UpDownRatioOnResonance) {
  const auto p = oracle::reference_design();
  for (int n = 1; n < 15; ++n) {
    const auto r = transition_rates(p, n);
    EXPECT_NEAR(r.gamma_up1 / r.gamma_down1, double(n + 1) / n, 1e-13);
  }
}

TEST(TransitionRates, ClosedFormGapShrinksWithKappa) {
  auto p = oracle::reference_design();
  for (double ratio : {1e-1, 1e-2, 1e-3, 1e-4}) {
    p.kappa = ratio * p.omega_m;
    const auto g = ground_state_rates(p);
    const double gap = std::abs(g.gamma1_exact - g.gamma1_approx) / g.gamma1_approx;
    EXPECT_LT(gap, std::pow(0.5 * ratio, 2) + 1e-12);
  }
}

TEST(MeasurementRate, RatioLadder) {
  const double expected[] = {0.32, 3.2, 32.0};
  int i = 0;
  for (double n : {1.0, 10.0, 100.0}) {
    const auto p = oracle::reference_design(n);
    EXPECT_NEAR(measurement_rate(p) / ground_state_rates(p).gamma_th0, expected[i++], 1e-12);
  }
  auto p = oracle::reference_design();
  EXPECT_NEAR(measurement_rate(p), 8.0 * p.gamma_m, 1e-9);
  p.g2 = 0.0;
  EXPECT_EQ(measurement_rate(p), 0.0);
}

TEST(MeasurementRate, DephasingWeight) {
  auto p = oracle::reference_design();
  p.delta = 0.3 * p.kappa;
  const double re_chi0 = 0.5 * p.kappa / (p.delta * p.delta + 0.25 * p.kappa * p.kappa);
  const double w = 2 * 100.0 * p.g2 * p.g2 * re_chi0;
  EXPECT_NEAR(dephasing_rate(p), w, 1e-12 * w);
}

TEST(MonitorableState, ReferenceDesign) {
  const auto b = max_monitorable_state(oracle::reference_design());
  EXPECT_NEAR(b.raw, 7.75 / 1.5, 1e-12);
  ASSERT_TRUE(b.floor.has_value());
  EXPECT_EQ(*b.floor, 5);
}

TEST(MonitorableState, Boundaries) {
  auto p = oracle::reference_design();
  // C2 = nbar_th: choose N so that C2 = 0.25.
  p.drive = Drive::photons(100.0 * 0.25 / 8.0);
  EXPECT_NEAR(max_monitorable_state(p).raw, 0.0, 1e-12);
  p = oracle::reference_design();
  p.bath = Bath::from_occupancy(0.0, p.omega_m);
  EXPECT_NEAR(max_monitorable_state(p).raw, 8.0, 1e-12);
  p = oracle::reference_design(1.0);
  const auto b = max_monitorable_state(p);
  EXPECT_LT(b.raw, 0.0);
  EXPECT_FALSE(b.floor.has_value());
}

TEST(Feasibility, ReferenceDesignAtDominanceFive) {
  const auto rep = feasibility(oracle::reference_design(), 0, 5.0);
  ASSERT_EQ(rep.ground_state.size(), 3u);
  EXPECT_NEAR(rep.ground_state[0].ratio, 32.0, 1e-12);
  EXPECT_NEAR(rep.ground_state[1].ratio, 1 / 0.125, 1e-12);
  EXPECT_NEAR(rep.ground_state[2].ratio, 1 / 0.0625, 1e-12);
  EXPECT_NEAR(rep.linear_limit.ratio, 16.0, 1e-12);
  EXPECT_NEAR(rep.sideband.ratio, 32.0 * 16.0, 1e-9);
  EXPECT_TRUE(rep.all_passed());
}

TEST(Feasibility, VerdictsFollowStoredRatios) {
  for (double d : {2.0, 5.0, 10.0, 40.0}) {
    const auto rep = feasibility(oracle::reference_design(), 2, d);
    for (const auto& c : rep.hierarchy) EXPECT_EQ(c.passed, c.ratio >= d) << c.name;
    for (const auto& c : rep.ground_state) EXPECT_EQ(c.passed, c.ratio >= d) << c.name;
    EXPECT_EQ(rep.linear_limit.passed, rep.linear_limit.ratio >= d);
  }
  EXPECT_THROW(feasibility(oracle::reference_design(), 0, 1.0), DomainError);
}

TEST(Feasibility, StrongLinearCouplingFails) {
  auto p = oracle::reference_design();
  p.g1 = oracle::kTwoPi * 5e6;
  const auto rep = feasibility(p, 0, 5.0);
  EXPECT_NEAR(rep.linear_limit.ratio, 0.16, 1e-12);
  EXPECT_FALSE(rep.all_passed());
}

TEST(Feasibility, NoLinearCouplingPassesLinearLimit) {
  auto p = oracle::reference_design();
  p.g1 = 0.0;
  const auto rep = feasibility(p, 0, 10.0);
  EXPECT_TRUE(std::isinf(rep.linear_limit.ratio));
  EXPECT_TRUE(rep.linear_limit.passed);
}
