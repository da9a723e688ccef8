#pragma once

#include <complex>

#include "qnd/errors.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// Linear response of the driven cavity: susceptibility and photon-number
/// noise spectrum. Evaluated in units of kappa internally.
class CavityResponse {
 public:
  CavityResponse(double kappa, double delta, double nbar) : kappa_(kappa), delta_(delta), nbar_(nbar) {
    if (!(kappa > 0.0)) throw DomainError("CavityResponse: kappa must be > 0");
    if (!(nbar >= 0.0)) throw DomainError("CavityResponse: photon number must be >= 0");
  }
  explicit CavityResponse(const SystemParams& p) : CavityResponse(p.kappa, p.delta, mean_photon_number(p)) {}

  double kappa() const { return kappa_; }
  double delta() const { return delta_; }
  double nbar() const { return nbar_; }

  /// chi_c(omega) = 1 / (i (delta + omega) + kappa / 2), seconds.
  std::complex<double> susceptibility(double omega) const {
    const double u = (omega + delta_) / kappa_;
    const double denom = u * u + 0.25;
    return {0.5 / denom / kappa_, -u / denom / kappa_};
  }

  /// S_NN(omega) = N kappa / ((omega - delta)^2 + (kappa/2)^2), seconds.
  double photon_spectral_density(double omega) const {
    const double v = (omega - delta_) / kappa_;
    return nbar_ / kappa_ / (v * v + 0.25);
  }

 private:
  double kappa_;
  double delta_;
  double nbar_;
};

}  // namespace qnd
