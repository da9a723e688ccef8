#pragma once

// Two optical modes coupled at rate nu, both coupled to one mechanical mode:
// supermode Hamiltonians, the membrane-in-the-middle avoided crossing and the
// single-mode mapping of a backscattering whispering-gallery pair.
//
// Operators act on (optical sector) (x) (mechanics). The optical sector is
// restricted to vacuum plus one photon, basis {|vac>, |1_A>, |1_B>}, on which
// every number-conserving quadratic optical form is represented exactly, so
// the supermode change of basis is an exact unitary.

#include <cmath>
#include <optional>
#include <utility>

#include "qnd/errors.hpp"
#include "qnd/fock.hpp"

namespace qnd {

struct TwoModeParams {
  double omega_1 = 0.0;  ///< rad/s
  double omega_2 = 0.0;  ///< rad/s
  double nu = 0.0;       ///< inter-mode coupling, rad/s
  double G1_a1 = 0.0;    ///< rad/s/m
  double G1_a2 = 0.0;
  double G2_a1 = 0.0;    ///< rad/s/m^2
  double G2_a2 = 0.0;
  double kappa = 0.0;    ///< rad/s
  double delta = 0.0;    ///< rad/s

  static TwoModeParams degenerate(double omega_0, double nu, double G1_a1, double G1_a2, double G2_a1 = 0.0,
                                  double G2_a2 = 0.0) {
    if (!(nu >= 0.0)) throw DomainError("TwoModeParams: nu must be >= 0");
    return {omega_0, omega_0, nu, G1_a1, G1_a2, G2_a1, G2_a2, 0.0, 0.0};
  }
  /// Membrane in the middle: G1 on the two modes with opposite signs, no G2.
  static TwoModeParams mim(double omega_0, double nu, double G1) { return degenerate(omega_0, nu, G1, -G1); }
  /// Whispering-gallery pair: identical couplings on both modes.
  static TwoModeParams wgm(double omega_0, double nu, double G1, double G2) {
    return degenerate(omega_0, nu, G1, G1, G2, G2);
  }

  bool is_degenerate() const { return omega_1 == omega_2; }
  double omega_0() const { return omega_1; }
  /// Cross-coupling coefficient (G1_a1 - G1_a2)/2; equals G1 for the MIM case.
  double g1_cross() const { return 0.5 * (G1_a1 - G1_a2); }
};

namespace detail {
struct OpticalSector {
  FockOperator n_a, n_b, hop_ab;  ///< a1^dag a1, a2^dag a2, a1^dag a2 + a2^dag a1
};
inline OpticalSector optical_sector() {
  Matrix na = Matrix::Zero(3, 3), nb = Matrix::Zero(3, 3), hop = Matrix::Zero(3, 3);
  na(1, 1) = 1.0;
  nb(2, 2) = 1.0;
  hop(1, 2) = hop(2, 1) = 1.0;
  return {FockOperator(na), FockOperator(nb), FockOperator(hop)};
}
inline FockOperator position(int dim, double x_zpf) {
  const Ladder l = ladder(dim);
  return x_zpf * (l.b + l.b_dag);
}
}  // namespace detail

/// Two-mode Hamiltonian in the original mode basis (H/hbar, rad/s), with
/// x = x_zpf (b + b^dag).
inline FockOperator two_mode_hamiltonian(const TwoModeParams& p, double omega_m, double x_zpf, int dim) {
  const auto o = detail::optical_sector();
  const FockOperator x = detail::position(dim, x_zpf);
  const FockOperator x2 = x * x;
  const FockOperator one_m = identity(dim), one_o = identity(3);
  FockOperator h = kron(p.omega_1 * o.n_a + p.omega_2 * o.n_b + p.nu * o.hop_ab, one_m) +
                   kron(one_o, omega_m * ladder(dim).n) + kron(p.G1_a1 * o.n_a + p.G1_a2 * o.n_b, x) +
                   kron(0.5 * p.G2_a1 * o.n_a + 0.5 * p.G2_a2 * o.n_b, x2);
  return h.with_label("H_two_mode");
}

/// Supermode basis change a_pm = (a1 +- a2)/sqrt2 as a unitary U on the full
/// space, so that H_super = U H U^dag. Single-photon states transform as
/// |1_+> = (|1_A> + |1_B>)/sqrt2, |1_-> = (|1_A> - |1_B>)/sqrt2; the basis
/// order in the supermode frame is {|vac>, |1_+>, |1_->}.
inline FockOperator supermode_transform(int dim) {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix u = Matrix::Zero(3, 3);
  u(0, 0) = 1.0;
  u(1, 1) = s, u(1, 2) = s;
  u(2, 1) = s, u(2, 2) = -s;
  return kron(FockOperator(u), identity(dim));
}

/// Two-mode Hamiltonian written directly in the supermode basis
/// {|vac>, |1_+>, |1_->} (x) mechanics, with omega_pm = omega_0 +- nu.
inline FockOperator supermode_hamiltonian(const TwoModeParams& p, double omega_m, double x_zpf, int dim) {
  if (!p.is_degenerate())
    throw DomainError("supermode_hamiltonian: modes are not degenerate; use two_mode_hamiltonian for omega_1 != omega_2");
  Matrix np = Matrix::Zero(3, 3), nm = Matrix::Zero(3, 3), cross = Matrix::Zero(3, 3);
  np(1, 1) = 1.0;
  nm(2, 2) = 1.0;
  cross(1, 2) = cross(2, 1) = 1.0;
  const FockOperator n_p(np), n_m(nm), x_pm(cross);
  const FockOperator self = n_p + n_m;
  const FockOperator x = detail::position(dim, x_zpf);
  const FockOperator x2 = x * x;
  const double w0 = p.omega_0();
  FockOperator h = kron((w0 + p.nu) * n_p + (w0 - p.nu) * n_m, identity(dim)) +
                   kron(identity(3), omega_m * ladder(dim).n) + kron((0.5 * (p.G1_a1 + p.G1_a2)) * self, x) +
                   kron((0.5 * (p.G1_a1 - p.G1_a2)) * x_pm, x) + kron((0.25 * (p.G2_a1 + p.G2_a2)) * self, x2) +
                   kron((0.25 * (p.G2_a1 - p.G2_a2)) * x_pm, x2);
  return h.with_label("H_supermode");
}

/// Membrane-in-the-middle form: supermodes plus G1 (a+^dag a- + h.c.) x only.
inline FockOperator mim_hamiltonian(double omega_0, double nu, double G1, double omega_m, double x_zpf, int dim) {
  const auto o = detail::optical_sector();  // same matrix shapes in the supermode basis
  return (kron((omega_0 + nu) * o.n_a + (omega_0 - nu) * o.n_b, identity(dim)) +
          kron(identity(3), omega_m * ladder(dim).n) + kron(G1 * o.hop_ab, detail::position(dim, x_zpf)))
      .with_label("H_MIM");
}

/// Whispering-gallery form: supermodes with self couplings only.
inline FockOperator wgm_hamiltonian(double omega_0, double nu, double G1, double G2, double omega_m, double x_zpf,
                                    int dim) {
  const auto o = detail::optical_sector();
  const FockOperator self = o.n_a + o.n_b;
  const FockOperator x = detail::position(dim, x_zpf);
  return (kron((omega_0 + nu) * o.n_a + (omega_0 - nu) * o.n_b, identity(dim)) +
          kron(identity(3), omega_m * ladder(dim).n) + kron(G1 * self, x) + kron((0.5 * G2) * self, x * x))
      .with_label("H_WGM");
}

struct BranchFrequencies {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
};

/// Exact avoided-crossing branches omega_0 +- sqrt(nu^2 + G1^2 x^2), with x
/// treated as a static displacement (meters).
inline BranchFrequencies mim_frequencies(const TwoModeParams& p, double x) {
  if (!(p.nu > 0.0)) throw DomainError("mim_frequencies: nu must be > 0");
  const double split = std::hypot(p.nu, p.g1_cross() * x);
  return {p.omega_0() + split, p.omega_0() - split};
}

/// Quadratic approximation omega_0 +- (nu + G2' x^2).
inline BranchFrequencies mim_frequencies_quadratic(const TwoModeParams& p, double x) {
  if (!(p.nu > 0.0)) throw DomainError("mim_frequencies_quadratic: nu must be > 0");
  const double g1 = p.g1_cross();
  const double split = p.nu + g1 * g1 / (2.0 * p.nu) * x * x;
  return {p.omega_0() + split, p.omega_0() - split};
}

struct EffectiveQuadratic {
  double G2_prime = 0.0;       ///< rad/s/m^2
  std::optional<double> g2;    ///< single-photon g1^2 / 2 nu, when x_zpf is given
};

inline EffectiveQuadratic mim_effective_g2(const TwoModeParams& p, std::optional<double> x_zpf = std::nullopt) {
  if (!(p.nu > 0.0))
    throw DomainError("mim_effective_g2: nu = 0 is a degenerate crossing; the quadratic expansion does not exist");
  const double g1 = p.g1_cross();
  EffectiveQuadratic e;
  e.G2_prime = g1 * g1 / (2.0 * p.nu);
  if (x_zpf) {
    const double g1s = g1 * *x_zpf;
    e.g2 = g1s * g1s / (2.0 * p.nu);
  }
  return e;
}

/// Occupancy of the undriven mode from backscattering,
/// N2 = nu^2 / (delta^2 + (kappa/2)^2) N1.
inline double backscatter_occupancy(double nu, double delta, double kappa, double n1) {
  if (!(kappa > 0.0)) throw DomainError("backscatter_occupancy: kappa must be > 0");
  if (!(n1 >= 0.0)) throw DomainError("backscatter_occupancy: N1 must be >= 0");
  const double hk = 0.5 * kappa;
  return nu * nu / (delta * delta + hk * hk) * n1;
}

enum class BackscatterRegime { weak, strong, unclassified };

inline const char* to_string(BackscatterRegime r) {
  switch (r) {
    case BackscatterRegime::weak: return "weak";
    case BackscatterRegime::strong: return "strong";
    case BackscatterRegime::unclassified: return "unclassified";
  }
  return "unclassified";
}

struct ModeMapping {
  double nbar = 0.0;                ///< photon number for the transition rates
  double measurement_factor = 1.0;  ///< multiplies Gamma_meas only
};

struct SingleModeMapping {
  BackscatterRegime regime = BackscatterRegime::unclassified;
  double ratio = 0.0;  ///< 2 nu / kappa
  double n2 = 0.0;
  std::optional<ModeMapping> mapping;  ///< set when the regime is classified
  ModeMapping weak_candidate;
  ModeMapping strong_candidate;
};

/// Single-mode parameters for a backscattering pair driven in mode 1. The
/// regime is weak when 2 nu / kappa <= 1/dominance and strong when it is
/// >= dominance; in between both candidates are reported.
inline SingleModeMapping single_mode_mapping(double nu, double kappa, double delta, double n1, double dominance = 10.0) {
  if (!(dominance > 1.0)) throw DomainError("single_mode_mapping: dominance must be > 1");
  if (!(nu >= 0.0)) throw DomainError("single_mode_mapping: nu must be >= 0");
  SingleModeMapping m;
  m.n2 = backscatter_occupancy(nu, delta, kappa, n1);
  m.ratio = 2.0 * nu / kappa;
  m.weak_candidate = {n1 + m.n2, 1.0};
  m.strong_candidate = {n1 + m.n2, 0.5};
  if (m.ratio * dominance <= 1.0) {
    m.regime = BackscatterRegime::weak;
    m.mapping = m.weak_candidate;
  } else if (m.ratio >= dominance) {
    m.regime = BackscatterRegime::strong;
    m.mapping = m.strong_candidate;
  }
  return m;
}

}  // namespace qnd
