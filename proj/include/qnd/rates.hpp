#pragma once

// Per-Fock-state decoherence rates, the measurement rate and the QND
// feasibility hierarchy. Rates are in rad/s.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qnd/cavity_response.hpp"
#include "qnd/errors.hpp"
#include "qnd/system.hpp"

namespace qnd {

struct RateSet {
  int n = 0;
  double gamma_up1 = 0.0;    ///< n -> n+1, optical
  double gamma_down1 = 0.0;  ///< n -> n-1, optical
  double gamma_up2 = 0.0;    ///< n -> n+2, optical
  double gamma_down2 = 0.0;  ///< n -> n-2, optical
  double thermal_up = 0.0;   ///< Gamma_m nbar (n+1)
  double thermal_down = 0.0; ///< Gamma_m (nbar+1) n
  double gamma_th = 0.0;     ///< thermal_up + thermal_down
  double gamma_meas = 0.0;

  double total_decoherence() const { return gamma_up1 + gamma_down1 + gamma_up2 + gamma_down2 + gamma_th; }
};

/// Gamma_meas = C2 Gamma_m = 4 N g2^2 / kappa.
inline double measurement_rate(const SystemParams& p) {
  return 4.0 * mean_photon_number(p) * p.g2 * p.g2 / p.kappa;
}

/// Weight of the number-dephasing channel D[b^dag b] in the reduced master
/// equation, 2 N g2^2 Re chi_c(0). Equals Gamma_meas only at zero detuning;
/// kept separate from measurement_rate on purpose.
inline double dephasing_rate(const SystemParams& p) {
  const CavityResponse cav(p);
  return 2.0 * cav.nbar() * p.g2 * p.g2 * cav.susceptibility(0.0).real();
}

inline RateSet transition_rates(const SystemParams& p, int n) {
  if (n < 0) throw DomainError("transition_rates: Fock index must be >= 0");
  const CavityResponse cav(p);
  const double nn = n;
  const double nbar = p.nbar_th();
  const double g1sq = p.g1 * p.g1;
  const double g2sq_4 = 0.25 * p.g2 * p.g2;

  RateSet r;
  r.n = n;
  r.gamma_up1 = (nn + 1.0) * g1sq * cav.photon_spectral_density(-p.omega_m);
  r.gamma_down1 = nn * g1sq * cav.photon_spectral_density(p.omega_m);
  r.gamma_up2 = (nn + 1.0) * (nn + 2.0) * g2sq_4 * cav.photon_spectral_density(-2.0 * p.omega_m);
  r.gamma_down2 = (n >= 2 ? nn * (nn - 1.0) : 0.0) * g2sq_4 * cav.photon_spectral_density(2.0 * p.omega_m);
  r.thermal_up = p.gamma_m * nbar * (nn + 1.0);
  r.thermal_down = p.gamma_m * (nbar + 1.0) * nn;
  r.gamma_th = r.thermal_up + r.thermal_down;
  r.gamma_meas = measurement_rate(p);
  return r;
}

struct GroundStateRates {
  double gamma_th0 = 0.0;      ///< nbar_th Gamma_m
  double gamma1_approx = 0.0;  ///< N g1^2 kappa / omega_m^2 (zero detuning, omega_m >> kappa)
  double gamma2_approx = 0.0;  ///< N g2^2 kappa / (8 omega_m^2)
  double gamma1_exact = 0.0;   ///< full Lorentzian, n = 0
  double gamma2_exact = 0.0;
  bool detuned = false;        ///< closed forms do not apply; exact values are used

  double gamma1() const { return detuned ? gamma1_exact : gamma1_approx; }
  double gamma2() const { return detuned ? gamma2_exact : gamma2_approx; }
};

inline GroundStateRates ground_state_rates(const SystemParams& p) {
  const double nbar = mean_photon_number(p);
  const double w2 = p.omega_m * p.omega_m;
  const RateSet r0 = transition_rates(p, 0);
  GroundStateRates g;
  g.gamma_th0 = p.nbar_th() * p.gamma_m;
  g.gamma1_approx = nbar * p.g1 * p.g1 * p.kappa / w2;
  g.gamma2_approx = nbar * p.g2 * p.g2 * p.kappa / (8.0 * w2);
  g.gamma1_exact = r0.gamma_up1;
  g.gamma2_exact = r0.gamma_up2;
  g.detuned = p.delta != 0.0;
  return g;
}

struct MonitorableBound {
  double raw = 0.0;
  std::optional<int> floor;  ///< empty when raw < 0: no state can be monitored
};

/// n_max = (C2 - nbar_th) / (2 nbar_th + 1).
inline MonitorableBound max_monitorable_state(const SystemParams& p) {
  const double c2 = cooperativities(p).c2;
  const double nbar = p.nbar_th();
  MonitorableBound b;
  b.raw = (c2 - nbar) / (2.0 * nbar + 1.0);
  if (b.raw >= 0.0) b.floor = static_cast<int>(std::floor(b.raw));
  return b;
}

/// One "A >> B" condition, judged as A >= dominance * B.
struct DominanceCheck {
  std::string name;
  double ratio = 0.0;  ///< A / B; +inf when B = 0 and A > 0
  bool passed = false;
};

struct FeasibilityReport {
  double dominance = 10.0;
  int n = 0;
  MonitorableBound n_max;
  std::vector<DominanceCheck> hierarchy;     ///< Gamma_meas >> Gamma_th >> Gamma_{n+-1}, Gamma_{n+-2}
  std::vector<DominanceCheck> ground_state;  ///< cooperativity form at n = 0
  DominanceCheck linear_limit;               ///< g2 >> g1 kappa / (2 omega_m)
  DominanceCheck sideband;                   ///< 32 omega_m^2 >> kappa^2
  bool detuned = false;

  bool all_passed() const {
    for (const auto& c : hierarchy)
      if (!c.passed) return false;
    for (const auto& c : ground_state)
      if (!c.passed) return false;
    return linear_limit.passed && sideband.passed;
  }
};

namespace detail {
inline double safe_ratio(double a, double b) {
  if (b == 0.0) return a > 0.0 ? std::numeric_limits<double>::infinity() : (a == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity());
  return a / b;
}
inline DominanceCheck check(std::string name, double a, double b, double dominance) {
  DominanceCheck c{std::move(name), safe_ratio(a, b), false};
  c.passed = c.ratio >= dominance;
  return c;
}
}  // namespace detail

/// Evaluates every ">>" condition with the ratio kept alongside its verdict.
/// Down-going checks at n = 0 (and n = 1 for two-phonon) have a zero
/// denominator and pass trivially.
inline FeasibilityReport feasibility(const SystemParams& p, int n, double dominance = 10.0) {
  if (!(dominance > 1.0)) throw DomainError("feasibility: dominance factor must be > 1");
  const RateSet r = transition_rates(p, n);
  const GroundStateRates g = ground_state_rates(p);

  FeasibilityReport rep;
  rep.dominance = dominance;
  rep.n = n;
  rep.n_max = max_monitorable_state(p);
  rep.detuned = g.detuned;

  using detail::check;
  rep.hierarchy.push_back(check("meas_over_thermal", r.gamma_meas, r.gamma_th, dominance));
  rep.hierarchy.push_back(check("thermal_over_up1", r.gamma_th, r.gamma_up1, dominance));
  rep.hierarchy.push_back(check("thermal_over_down1", r.gamma_th, r.gamma_down1, dominance));
  rep.hierarchy.push_back(check("thermal_over_up2", r.gamma_th, r.gamma_up2, dominance));
  rep.hierarchy.push_back(check("thermal_over_down2", r.gamma_th, r.gamma_down2, dominance));

  // Quantum-cooperativity form: C2 >> 1 >> C1 k^2/4w^2, C2 k^2/32w^2. These
  // are Gamma_meas/Gamma_th0, Gamma_th0/Gamma_1, Gamma_th0/Gamma_2.
  rep.ground_state.push_back(check("quantum_cooperativity", r.gamma_meas, g.gamma_th0, dominance));
  rep.ground_state.push_back(check("ground_linear", g.gamma_th0, g.gamma1(), dominance));
  rep.ground_state.push_back(check("ground_quadratic", g.gamma_th0, g.gamma2(), dominance));

  rep.linear_limit = check("linear_limit", p.g2 * 2.0 * p.omega_m, p.g1 * p.kappa, dominance);
  rep.sideband = check("sideband", 32.0 * p.omega_m * p.omega_m, p.kappa * p.kappa, dominance);
  return rep;
}

}  // namespace qnd
