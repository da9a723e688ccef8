#pragma once

// Stochastic phonon-number trajectories: exact jump (Gillespie) sampling of
// the number-diagonal chain, a Monte Carlo wave-function unraveling of any
// LindbladGenerator, and seeded ensemble statistics.
//
// RNG: std::mt19937_64 (MT19937-64, Matsumoto & Nishimura). Its output
// sequence is fixed by the C++ standard; the conversions to uniform and
// exponential variates below are written out so that they are identical on
// every platform.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qnd/errors.hpp"
#include "qnd/fock.hpp"
#include "qnd/lindblad.hpp"
#include "qnd/rates.hpp"
#include "qnd/system.hpp"

namespace qnd {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  /// Unit-mean exponential variate.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 eng_;
};

struct JumpEvent {
  double time = 0.0;  ///< seconds
  int new_n = 0;
  ChannelKind channel = ChannelKind::other;
};

struct Trajectory {
  std::uint64_t seed = 0;
  int initial_n = 0;
  double t_final = 0.0;
  std::vector<JumpEvent> events;  ///< population-changing jumps only
  long dephasing_jumps = 0;       ///< b^dag b jumps (no population change)
  long other_jumps = 0;           ///< e.g. cavity photon loss in bipartite runs
  std::vector<Vector> samples;    ///< normalized state at requested times (quantum-jump runs only)

  /// Phonon number at time t (right-continuous).
  int n_at(double t) const {
    int n = initial_n;
    for (const auto& e : events) {
      if (e.time > t) break;
      n = e.new_n;
    }
    return n;
  }
};

/// Occupation truncation for jump simulations: smallest n whose
/// Bose-Einstein tail is below 1e-9, times 4, at least 20.
inline int default_n_cap(double nbar_th) {
  if (!(nbar_th >= 0.0)) throw DomainError("default_n_cap: nbar_th must be >= 0");
  int n = 0;
  if (nbar_th > 0.0) {
    const double q = nbar_th / (1.0 + nbar_th);
    n = static_cast<int>(std::ceil(std::log(1e-9) / std::log(q)));
  }
  return std::max(20, 4 * n);
}

namespace detail {

inline constexpr std::array<ChannelKind, 6> kJumpChannels = {ChannelKind::thermal_up, ChannelKind::thermal_down,
                                                             ChannelKind::opt_up1,    ChannelKind::opt_down1,
                                                             ChannelKind::opt_up2,    ChannelKind::opt_down2};

inline int channel_index(ChannelKind k) {
  for (std::size_t i = 0; i < kJumpChannels.size(); ++i)
    if (kJumpChannels[i] == k) return static_cast<int>(i);
  return -1;
}

inline std::array<double, 6> channel_rates(const RateSet& r) {
  return {r.thermal_up, r.thermal_down, r.gamma_up1, r.gamma_down1, r.gamma_up2, r.gamma_down2};
}

/// Index i of the first weight whose cumulative sum exceeds `target`;
/// zero-weight entries are never chosen.
inline int pick_index(const double* w, std::size_t size, double target) {
  int last = -1;
  for (std::size_t i = 0; i < size; ++i) {
    if (w[i] <= 0.0) continue;
    last = static_cast<int>(i);
    if ((target -= w[i]) < 0.0) return last;
  }
  return last;
}

}  // namespace detail

/// Exact simulation of the birth-death(+2) chain with the analytic rates.
/// Throws NumericalError("truncation reached") if n reaches n_cap.
inline Trajectory simulate_jump_trajectory(const SystemParams& p, int n0, double t_final, std::uint64_t seed,
                                           std::optional<int> n_cap = std::nullopt) {
  if (!(t_final > 0.0)) throw DomainError("simulate_jump_trajectory: t_final must be > 0");
  const int cap = n_cap.value_or(default_n_cap(p.nbar_th()));
  if (n0 < 0 || n0 >= cap) throw DomainError("simulate_jump_trajectory: n0 outside [0, n_cap)");

  std::vector<std::array<double, 6>> table(cap);
  for (int n = 0; n < cap; ++n) table[n] = detail::channel_rates(transition_rates(p, n));

  Rng rng(seed);
  Trajectory tr;
  tr.seed = seed;
  tr.initial_n = n0;
  tr.t_final = t_final;
  int n = n0;
  double t = 0.0;
  for (;;) {
    const auto& r = table[n];
    double total = 0.0;
    for (double x : r) total += x;
    if (total <= 0.0) break;
    t += rng.exponential() / total;
    if (t >= t_final) break;
    const int k = detail::pick_index(r.data(), r.size(), rng.uniform() * total);
    const ChannelKind kind = detail::kJumpChannels[k];
    n += phonon_change(kind);
    tr.events.push_back({t, n, kind});
    if (n >= cap) throw NumericalError("simulate_jump_trajectory: truncation reached (n_cap = " + std::to_string(cap) + ")");
  }
  return tr;
}

struct QuantumJumpOptions {
  std::vector<double> sample_times;  ///< seconds, increasing; states stored in Trajectory::samples
  double time_tol = 1e-12;           ///< relative bisection tolerance on jump times
};

/// Monte Carlo wave-function unraveling: exact non-Hermitian drift between
/// jumps (eigendecomposition of H_eff), jump times from the norm decay.
/// Events carry the most probable phonon number after each jump.
inline Trajectory simulate_quantum_jump(const LindbladGenerator& gen, const Vector& psi0, double t_final,
                                        std::uint64_t seed, const QuantumJumpOptions& opt = {}) {
  const int d = gen.dim();
  if (psi0.size() != d) throw DomainError("simulate_quantum_jump: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("simulate_quantum_jump: psi0 must be normalized");
  if (!(t_final > 0.0)) throw DomainError("simulate_quantum_jump: t_final must be > 0");
  for (std::size_t i = 1; i < opt.sample_times.size(); ++i)
    if (!(opt.sample_times[i] >= opt.sample_times[i - 1])) throw DomainError("simulate_quantum_jump: sample times must increase");

  const Matrix heff = gen.effective_hamiltonian();
  // Number-diagonal generators give a diagonal H_eff; skip the basis change.
  const bool diagonal = (heff - Matrix(heff.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  Matrix v, vinv;
  Vector lam;
  if (diagonal) {
    lam = heff.diagonal();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(heff);
    if (es.info() != Eigen::Success) throw NumericalError("simulate_quantum_jump: eigendecomposition failed");
    v = es.eigenvectors();
    lam = es.eigenvalues();
    vinv = v.inverse();
    const double recon = (v * lam.asDiagonal() * vinv - heff).cwiseAbs().maxCoeff();
    if (!(recon <= 1e-8 * std::max(1.0, heff.cwiseAbs().maxCoeff())))
      throw NumericalError("simulate_quantum_jump: effective Hamiltonian is not diagonalizable to working precision");
  }

  std::vector<const Channel*> live;
  for (const auto& c : gen.channels())
    if (c.weight > 0.0) live.push_back(&c);

  auto phonon_mode = [&](const Vector& psi) {
    std::vector<double> pops(gen.phonon_dim(), 0.0);
    for (int i = 0; i < d; ++i) pops[i % gen.phonon_dim()] += std::norm(psi(i));
    return static_cast<int>(std::max_element(pops.begin(), pops.end()) - pops.begin());
  };

  Rng rng(seed);
  Trajectory tr;
  tr.seed = seed;
  tr.t_final = t_final;
  tr.initial_n = phonon_mode(psi0);

  Vector psi = psi0;
  double t = 0.0;
  std::size_t next_sample = 0;
  Vector c(d), out(d);
  auto propagate = [&](double dt) {
    for (int i = 0; i < d; ++i) out(i) = c(i) * std::exp(cplx(0.0, -1.0) * lam(i) * dt);
    return diagonal ? Vector(out) : Vector(v * out);
  };
  // Norm^2 of the unnormalized state; decays monotonically from 1.
  auto norm2 = [&](double dt) {
    if (!diagonal) return propagate(dt).squaredNorm();
    double sum = 0.0;
    for (int i = 0; i < d; ++i)
      if (c(i) != 0.0) sum += std::norm(c(i)) * std::exp(2.0 * lam(i).imag() * dt);
    return sum;
  };

  while (t < t_final) {
    c = diagonal ? psi : Vector(vinv * psi);
    const double r = rng.uniform();
    const double horizon = t_final - t;
    double t_jump = horizon;
    bool jumped = false;
    if (norm2(horizon) <= r) {
      double lo = 0.0, hi = horizon;
      for (int it = 0; it < 200 && hi - lo > opt.time_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (norm2(mid) > r) lo = mid; else hi = mid;
      }
      t_jump = hi;
      jumped = true;
    }
    while (next_sample < opt.sample_times.size() && opt.sample_times[next_sample] < t + t_jump) {
      const Vector s = propagate(opt.sample_times[next_sample] - t);
      tr.samples.push_back(s / s.norm());
      ++next_sample;
    }
    psi = propagate(t_jump);
    t += t_jump;
    if (!jumped) break;
    psi /= psi.norm();

    std::vector<double> prob(live.size());
    double total = 0.0;
    std::vector<Vector> candidates(live.size());
    for (std::size_t k = 0; k < live.size(); ++k) {
      candidates[k] = live[k]->op.matrix() * psi;
      total += (prob[k] = live[k]->weight * candidates[k].squaredNorm());
    }
    if (!(total > 0.0)) throw NumericalError("simulate_quantum_jump: jump with zero total rate");
    const int k = detail::pick_index(prob.data(), prob.size(), rng.uniform() * total);
    psi = candidates[k] / candidates[k].norm();
    const ChannelKind kind = live[k]->kind;
    if (kind == ChannelKind::dephasing) ++tr.dephasing_jumps;
    else if (phonon_change(kind) == 0) ++tr.other_jumps;
    else tr.events.push_back({t, phonon_mode(psi), kind});
  }
  while (next_sample < opt.sample_times.size() && opt.sample_times[next_sample] <= t_final) {
    tr.samples.push_back(psi / psi.norm());
    ++next_sample;
  }
  return tr;
}

struct EnsembleStats {
  std::uint64_t seed_base = 0;
  int count = 0;
  int n_cap = 0;
  std::vector<double> occupancy;                  ///< time-averaged p_n, sums to 1
  std::vector<double> time_in_state;              ///< summed seconds in n
  std::vector<std::array<long, 6>> jumps;         ///< [n][channel] jumps out of n
  std::vector<long> visits;                       ///< sojourns started in n
  std::vector<long> completed_sojourns;           ///< sojourns ended by a jump
  std::vector<double> completed_dwell_time;       ///< summed length of those sojourns
  long total_events = 0;
  long dephasing_jumps = 0;
  long other_jumps = 0;

  /// Empirical rate of `channel` out of state n: jumps / time in n.
  double empirical_rate(int n, ChannelKind channel) const {
    const int k = detail::channel_index(channel);
    if (k < 0 || n < 0 || n >= static_cast<int>(time_in_state.size()) || time_in_state[n] == 0.0) return 0.0;
    return jumps[n][k] / time_in_state[n];
  }
  long jump_count(int n, ChannelKind channel) const {
    const int k = detail::channel_index(channel);
    if (k < 0 || n < 0 || n >= static_cast<int>(jumps.size())) return 0;
    return jumps[n][k];
  }
  double mean_dwell(int n) const {
    if (n < 0 || n >= static_cast<int>(completed_sojourns.size()) || completed_sojourns[n] == 0) return 0.0;
    return completed_dwell_time[n] / completed_sojourns[n];
  }
  double mean_occupation() const {
    double m = 0.0;
    for (std::size_t n = 0; n < occupancy.size(); ++n) m += n * occupancy[n];
    return m;
  }
};

/// Accumulates one trajectory into `s` (whose vectors are sized to the cap).
inline void accumulate(EnsembleStats& s, const Trajectory& tr) {
  const int cap = static_cast<int>(s.time_in_state.size());
  auto grow = [&](int n) {
    if (n >= cap) throw NumericalError("ensemble: state beyond the statistics cap");
  };
  int n = tr.initial_n;
  double t = 0.0;
  grow(n);
  s.visits[n] += 1;
  for (const auto& e : tr.events) {
    s.time_in_state[n] += e.time - t;
    s.completed_sojourns[n] += 1;
    s.completed_dwell_time[n] += e.time - t;
    s.jumps[n][detail::channel_index(e.channel)] += 1;
    t = e.time;
    n = e.new_n;
    grow(n);
    s.visits[n] += 1;
  }
  s.time_in_state[n] += tr.t_final - t;
  s.total_events += static_cast<long>(tr.events.size());
  s.dephasing_jumps += tr.dephasing_jumps;
  s.other_jumps += tr.other_jumps;
}

inline EnsembleStats make_stats(int cap, std::uint64_t seed_base, int count) {
  EnsembleStats s;
  s.seed_base = seed_base;
  s.count = count;
  s.n_cap = cap;
  s.occupancy.assign(cap, 0.0);
  s.time_in_state.assign(cap, 0.0);
  s.jumps.assign(cap, std::array<long, 6>{});
  s.visits.assign(cap, 0);
  s.completed_sojourns.assign(cap, 0);
  s.completed_dwell_time.assign(cap, 0.0);
  return s;
}

inline void finalize(EnsembleStats& s) {
  double total = 0.0;
  for (double x : s.time_in_state) total += x;
  for (std::size_t n = 0; n < s.time_in_state.size(); ++n) s.occupancy[n] = total > 0.0 ? s.time_in_state[n] / total : 0.0;
}

/// Worker count from QND_THREADS (unset or 0 = hardware concurrency).
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QND_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs `count` trajectories produced by `make(index)` on a worker pool and
/// reduces them in index order, so results do not depend on scheduling.
template <typename Make>
EnsembleStats run_ensemble(Make&& make, int count, int cap, std::uint64_t seed_base, unsigned threads = 0) {
  if (count < 1) throw DomainError("ensemble: count must be >= 1");
  std::vector<Trajectory> trajs(count);
  std::vector<std::string> errors(count);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < count;) {
      try {
        trajs[i] = make(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned nthreads = std::min<unsigned>(threads ? threads : worker_count(), static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < nthreads; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (int i = 0; i < count; ++i)
    if (!errors[i].empty()) throw NumericalError("trajectory " + std::to_string(i) + ": " + errors[i]);

  EnsembleStats s = make_stats(cap, seed_base, count);
  for (const auto& tr : trajs) accumulate(s, tr);
  finalize(s);
  return s;
}

/// Gillespie ensemble; trajectory i uses seed seed_base + i.
inline EnsembleStats ensemble(const SystemParams& p, int n0, double t_final, int count, std::uint64_t seed_base,
                              std::optional<int> n_cap = std::nullopt, unsigned threads = 0) {
  const int cap = n_cap.value_or(default_n_cap(p.nbar_th()));
  return run_ensemble([&](int i) { return simulate_jump_trajectory(p, n0, t_final, seed_base + i, cap); }, count, cap,
                      seed_base, threads);
}

/// Quantum-jump ensemble started from the phonon Fock state n0 (cavity vacuum).
inline EnsembleStats ensemble(const LindbladGenerator& gen, int n0, double t_final, int count, std::uint64_t seed_base,
                              unsigned threads = 0) {
  if (n0 < 0 || n0 >= gen.phonon_dim()) throw DomainError("ensemble: n0 outside truncation");
  Vector psi0 = Vector::Zero(gen.dim());
  psi0(n0) = 1.0;
  return run_ensemble([&](int i) { return simulate_quantum_jump(gen, psi0, t_final, seed_base + i); }, count,
                      gen.phonon_dim(), seed_base, threads);
}

/// Boxcar-averaged phonon number on a uniform grid, approximating a filtered
/// measurement record. `window` is in samples (odd values keep it centered).
inline std::vector<std::pair<double, double>> staircase(const Trajectory& tr, int samples, int window) {
  if (samples < 2) throw DomainError("staircase: need at least 2 samples");
  if (window < 1) throw DomainError("staircase: window must be >= 1");
  std::vector<double> n(samples);
  const double dt = tr.t_final / (samples - 1);
  std::size_t e = 0;
  int cur = tr.initial_n;
  for (int i = 0; i < samples; ++i) {
    const double t = i * dt;
    while (e < tr.events.size() && tr.events[e].time <= t) cur = tr.events[e++].new_n;
    n[i] = cur;
  }
  std::vector<std::pair<double, double>> out(samples);
  const int half = window / 2;
  for (int i = 0; i < samples; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(samples - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += n[j];
    out[i] = {i * dt, sum / (hi - lo + 1)};
  }
  return out;
}

}  // namespace qnd
