#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "qnd/constants.hpp"
#include "qnd/errors.hpp"

namespace qnd {

/// Bose-Einstein occupancy of a bath mode at `omega` (rad/s) and `kelvin`.
inline double thermal_occupancy(double omega, double kelvin) {
  if (!(omega > 0.0)) throw DomainError("thermal_occupancy: omega must be > 0");
  if (!(kelvin > 0.0))
    throw DomainError("thermal_occupancy: temperature must be > 0 (give nbar_th = 0 for zero temperature)");
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * kelvin));
}

/// Inverse of thermal_occupancy. Zero occupancy maps to zero temperature.
inline double temperature_for_occupancy(double omega, double nbar) {
  if (!(omega > 0.0)) throw DomainError("temperature_for_occupancy: omega must be > 0");
  if (!(nbar >= 0.0)) throw DomainError("temperature_for_occupancy: nbar must be >= 0");
  if (nbar == 0.0) return 0.0;
  return kHbar * omega / (kBoltzmann * std::log1p(1.0 / nbar));
}

inline double zero_point_amplitude(double mass_kg, double omega_m) {
  if (!(mass_kg > 0.0)) throw DomainError("zero_point_amplitude: mass must be > 0");
  if (!(omega_m > 0.0)) throw DomainError("zero_point_amplitude: omega_m must be > 0");
  return std::sqrt(kHbar / (2.0 * mass_kg * omega_m));
}

/// Mechanical bath. Exactly one of temperature or occupancy is specified; the
/// other is derived on construction.
class Bath {
 public:
  static Bath from_temperature(double kelvin, double omega_m) {
    return Bath(thermal_occupancy(omega_m, kelvin), kelvin, true);
  }
  static Bath from_occupancy(double nbar, double omega_m) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw DomainError("bath occupancy must be finite and >= 0");
    return Bath(nbar, temperature_for_occupancy(omega_m, nbar), false);
  }

  double nbar_th() const { return nbar_; }
  double temperature() const { return kelvin_; }
  bool given_as_temperature() const { return from_temperature_; }

 private:
  Bath(double nbar, double kelvin, bool from_t) : nbar_(nbar), kelvin_(kelvin), from_temperature_(from_t) {}
  double nbar_;
  double kelvin_;
  bool from_temperature_;
};

/// Optical drive: either the mean intracavity photon number or an input power
/// at a drive frequency.
struct Drive {
  std::optional<double> photon_number;
  double power_w = 0.0;
  double omega_d = 0.0;

  static Drive photons(double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw DomainError("photon number must be finite and >= 0");
    return Drive{nbar, 0.0, 0.0};
  }
  static Drive power(double watts, double omega_d) {
    if (!(watts >= 0.0)) throw DomainError("drive power must be >= 0");
    if (!(omega_d > 0.0)) throw DomainError("drive frequency must be > 0");
    return Drive{std::nullopt, watts, omega_d};
  }
  bool given_as_power() const { return !photon_number.has_value(); }
};

/// Physical parameter set. All frequencies and rates are angular (rad/s).
struct SystemParams {
  double omega_m = 0.0;  ///< mechanical frequency
  double gamma_m = 0.0;  ///< mechanical damping
  double kappa = 0.0;    ///< total cavity decay
  double kappa_e = 0.0;  ///< external cavity decay
  double delta = 0.0;    ///< detuning omega_c - omega_d
  double g1 = 0.0;       ///< single-photon single-phonon coupling
  double g2 = 0.0;       ///< single-photon two-phonon coupling
  Bath bath = Bath::from_occupancy(0.0, 1.0);
  Drive drive = Drive::photons(0.0);
  std::optional<double> mass_kg;

  double nbar_th() const { return bath.nbar_th(); }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be finite and > 0");
    };
    positive(omega_m, "omega_m");
    positive(gamma_m, "gamma_m");
    positive(kappa, "kappa");
    positive(kappa_e, "kappa_e");
    if (kappa_e > kappa) throw DomainError("kappa_e must not exceed kappa");
    if (!std::isfinite(delta)) throw DomainError("delta must be finite");
    if (!(g1 >= 0.0) || !std::isfinite(g1)) throw DomainError("g1 must be finite and >= 0");
    if (!(g2 >= 0.0) || !std::isfinite(g2)) throw DomainError("g2 must be finite and >= 0");
    if (mass_kg && !(*mass_kg > 0.0)) throw DomainError("mass must be > 0");
  }
};

/// Mean intracavity photon number, from the drive power when the drive is
/// given that way.
inline double mean_photon_number(const SystemParams& p) {
  if (p.drive.photon_number) return *p.drive.photon_number;
  const double half_kappa = 0.5 * p.kappa;
  return p.kappa_e / (p.delta * p.delta + half_kappa * half_kappa) * p.drive.power_w / (kHbar * p.drive.omega_d);
}

/// Input power that produces `nbar` photons (inverse of mean_photon_number).
inline double power_for_photon_number(const SystemParams& p, double nbar, double omega_d) {
  const double half_kappa = 0.5 * p.kappa;
  return nbar * (p.delta * p.delta + half_kappa * half_kappa) * kHbar * omega_d / p.kappa_e;
}

inline double zero_point_amplitude(const SystemParams& p) {
  if (!p.mass_kg) throw DomainError("mass required for zero-point amplitude");
  return zero_point_amplitude(*p.mass_kg, p.omega_m);
}

struct Cooperativities {
  double c1 = 0.0;  ///< cavity-enhanced, 4 N g1^2 / (kappa Gamma_m)
  double c2 = 0.0;
  /// Quantum cooperativities c_i / nbar_th; empty when nbar_th = 0 (unbounded).
  std::optional<double> quantum1;
  std::optional<double> quantum2;
};

inline Cooperativities cooperativities(const SystemParams& p) {
  const double nbar = mean_photon_number(p);
  Cooperativities c;
  c.c1 = 4.0 * nbar * p.g1 * p.g1 / (p.kappa * p.gamma_m);
  c.c2 = 4.0 * nbar * p.g2 * p.g2 / (p.kappa * p.gamma_m);
  if (p.nbar_th() > 0.0) {
    c.quantum1 = c.c1 / p.nbar_th();
    c.quantum2 = c.c2 / p.nbar_th();
  }
  return c;
}

}  // namespace qnd
