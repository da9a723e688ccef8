#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "qnd/trajectories.hpp"
#include "support/oracles.hpp"

using namespace qnd;

namespace {

// Rates of order one so that short runs collect many events.
SystemParams busy_params() { return oracle::scaled(4.0, 0.5, 0.4, 3.0, 0.4, 0.6, 0.2); }

double poisson_band(double expected) { return 5.0 * std::sqrt(std::max(expected, 1.0)); }

}  // namespace

TEST(Rng, MatchesStandardEngine) {
  std::mt19937_64 ref(42);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_EQ(u, static_cast<double>(ref() >> 11) / 9007199254740992.0);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  std::mt19937_64 dflt;
  dflt.discard(9999);
  EXPECT_EQ(dflt(), 9981545732273789042ULL);
}

TEST(Rng, ExponentialMean) {
  Rng rng(9);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += rng.exponential();
  EXPECT_NEAR(s / n, 1.0, 5.0 / std::sqrt(n));
}

TEST(NCap, DefaultTruncation) {
  EXPECT_EQ(default_n_cap(0.0), 20);
  EXPECT_EQ(default_n_cap(0.25), 52);
  EXPECT_THROW(default_n_cap(-1.0), DomainError);
}

TEST(JumpTrajectory, SeedReproducible) {
  const auto p = busy_params();
  const auto a = simulate_jump_trajectory(p, 0, 50.0, 7);
  const auto b = simulate_jump_trajectory(p, 0, 50.0, 7);
  const auto c = simulate_jump_trajectory(p, 0, 50.0, 8);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].time, b.events[i].time);
    EXPECT_EQ(a.events[i].new_n, b.events[i].new_n);
  }
  EXPECT_FALSE(a.events.size() == c.events.size() && a.events.front().time == c.events.front().time);
}

TEST(JumpTrajectory, EventsAreOrderedAndConsistent) {
  const auto p = busy_params();
  const auto tr = simulate_jump_trajectory(p, 2, 100.0, 3);
  int n = 2;
  double t = 0.0;
  for (const auto& e : tr.events) {
    EXPECT_GT(e.time, t);
    EXPECT_LT(e.time, 100.0);
    EXPECT_EQ(e.new_n, n + phonon_change(e.channel));
    EXPECT_GE(e.new_n, 0);
    EXPECT_EQ(tr.n_at(e.time), e.new_n);
    t = e.time;
    n = e.new_n;
  }
  EXPECT_EQ(tr.n_at(0.0), tr.events.empty() || tr.events[0].time > 0 ? 2 : tr.events[0].new_n);
}

TEST(JumpTrajectory, NoRatesNoEvents) {
  const auto p = oracle::scaled(4.0, 0.5, 0.0, 0.0, 0.0, 0.0);
  const auto tr = simulate_jump_trajectory(p, 0, 10.0, 1);
  EXPECT_TRUE(tr.events.empty());
}

TEST(JumpTrajectory, TruncationReported) {
  const auto p = oracle::scaled(4.0, 1.0, 5.0, 0.0, 0.0, 0.0);
  EXPECT_THROW(simulate_jump_trajectory(p, 0, 1e4, 1, 6), NumericalError);
  EXPECT_THROW(simulate_jump_trajectory(p, 6, 1.0, 1, 6), DomainError);
}

TEST(Ensemble, EmpiricalRatesMatchAnalytic) {
  const auto p = busy_params();
  const auto s = ensemble(p, 0, 200.0, 200, 1000);
  for (int n = 0; n < 10; ++n) {
    if (s.time_in_state[n] == 0.0) continue;
    const auto r = transition_rates(p, n);
    const std::pair<ChannelKind, double> ch[] = {
        {ChannelKind::thermal_up, r.thermal_up}, {ChannelKind::thermal_down, r.thermal_down},
        {ChannelKind::opt_up1, r.gamma_up1},     {ChannelKind::opt_down1, r.gamma_down1},
        {ChannelKind::opt_up2, r.gamma_up2},     {ChannelKind::opt_down2, r.gamma_down2}};
    for (const auto& [kind, rate] : ch) {
      const double expected = rate * s.time_in_state[n];
      if (rate == 0.0) {
        EXPECT_EQ(s.jump_count(n, kind), 0) << n << " " << to_string(kind);
      } else {
        EXPECT_NEAR(s.jump_count(n, kind), expected, poisson_band(expected)) << n << " " << to_string(kind);
      }
    }
    if (s.completed_sojourns[n] > 1000)
      EXPECT_NEAR(s.mean_dwell(n), 1.0 / r.total_decoherence(), 5.0 / (r.total_decoherence() * std::sqrt(s.completed_sojourns[n])));
  }
}

TEST(Ensemble, OccupancyMatchesBirthDeathChain) {
  const auto p = busy_params();
  const auto s = ensemble(p, 0, 400.0, 200, 77);
  const auto bd = oracle::birth_death_stationary(p, s.n_cap);
  EXPECT_LT(oracle::total_variation(s.occupancy, bd), 0.02);
  double sum = 0.0;
  for (double x : s.occupancy) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Ensemble, IndependentOfThreadCount) {
  const auto p = busy_params();
  const auto a = ensemble(p, 1, 30.0, 40, 5, std::nullopt, 1);
  const auto b = ensemble(p, 1, 30.0, 40, 5, std::nullopt, 4);
  EXPECT_EQ(a.total_events, b.total_events);
  for (std::size_t n = 0; n < a.occupancy.size(); ++n) {
    EXPECT_EQ(a.time_in_state[n], b.time_in_state[n]);
    EXPECT_EQ(a.jumps[n], b.jumps[n]);
  }
}

TEST(Ensemble, ThreadCountFromEnvironment) {
  ::setenv("QND_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("QND_THREADS", "junk", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("QND_THREADS");
}

TEST(QuantumJump, DiagonalGeneratorReproducesRates) {
  const auto p = busy_params();
  const int d = 20;
  const auto s = ensemble(reduced_generator(p, d), 0, 100.0, 100, 400);
  EXPECT_GT(s.dephasing_jumps, 0);
  for (int n = 0; n < 6; ++n) {
    const auto r = transition_rates(p, n);
    const std::pair<ChannelKind, double> ch[] = {{ChannelKind::thermal_up, r.thermal_up},
                                                 {ChannelKind::opt_up1, r.gamma_up1},
                                                 {ChannelKind::opt_down1, r.gamma_down1},
                                                 {ChannelKind::opt_up2, r.gamma_up2}};
    for (const auto& [kind, rate] : ch) {
      const double expected = rate * s.time_in_state[n];
      EXPECT_NEAR(s.jump_count(n, kind), expected, poisson_band(expected)) << n << " " << to_string(kind);
    }
  }
  const auto bd = oracle::birth_death_stationary(p, d);
  EXPECT_LT(oracle::total_variation(s.occupancy, bd), 0.03);
}

TEST(QuantumJump, AverageMatchesMasterEquation) {
  const auto p = oracle::scaled(3.0, 0.2, 0.3, 1.0, 0.3, 0.3, 0.5);
  const auto gen = bipartite_generator(p, 3, 4);
  const std::vector<double> ts = {0.5, 2.0, 5.0};
  QuantumJumpOptions o;
  o.sample_times = ts;
  Vector psi0 = Vector::Zero(gen.dim());
  psi0(1) = 1.0;
  const int count = 1500;
  std::vector<std::vector<double>> mean(ts.size(), std::vector<double>(4, 0.0));
  for (int i = 0; i < count; ++i) {
    const auto tr = simulate_quantum_jump(gen, psi0, 5.0, 900 + i, o);
    ASSERT_EQ(tr.samples.size(), ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      EXPECT_NEAR(tr.samples[k].norm(), 1.0, 1e-10);
      for (int j = 0; j < gen.dim(); ++j) mean[k][j % 4] += std::norm(tr.samples[k](j)) / count;
    }
  }
  Matrix rho0 = psi0 * psi0.adjoint();
  const auto res = evolve(gen, DensityMatrix(rho0), 5.0, 10);
  const int idx[] = {1, 4, 10};
  for (std::size_t k = 0; k < ts.size(); ++k)
    for (int n = 0; n < 4; ++n) {
      const double pe = res.populations[idx[k]][n];
      EXPECT_NEAR(mean[k][n], pe, 5.0 * std::sqrt(pe * (1 - pe) / count) + 1e-3) << ts[k] << " " << n;
    }
}

TEST(QuantumJump, RejectsBadInput) {
  const auto gen = reduced_generator(busy_params(), 5);
  EXPECT_THROW(simulate_quantum_jump(gen, Vector::Zero(4), 1.0, 1), DomainError);
  Vector v = Vector::Zero(5);
  v(0) = 2.0;
  EXPECT_THROW(simulate_quantum_jump(gen, v, 1.0, 1), DomainError);
  v(0) = 1.0;
  QuantumJumpOptions o;
  o.sample_times = {0.5, 0.2};
  EXPECT_THROW(simulate_quantum_jump(gen, v, 1.0, 1, o), DomainError);
}

TEST(Staircase, UnitWindowIsPiecewiseConstant) {
  Trajectory tr;
  tr.initial_n = 1;
  tr.t_final = 10.0;
  tr.events = {{2.5, 2, ChannelKind::opt_up1}, {7.0, 0, ChannelKind::opt_down2}};
  const auto s = staircase(tr, 11, 1);
  for (const auto& [t, n] : s) EXPECT_EQ(n, tr.n_at(t));
  const auto w = staircase(tr, 11, 3);
  EXPECT_DOUBLE_EQ(w[0].second, 1.0);
  EXPECT_DOUBLE_EQ(w[3].second, (1.0 + 2.0 + 2.0) / 3.0);
  EXPECT_DOUBLE_EQ(w[10].second, 0.0);
  EXPECT_THROW(staircase(tr, 1, 1), DomainError);
  EXPECT_THROW(staircase(tr, 5, 0), DomainError);
}
