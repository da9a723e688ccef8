#pragma once

// Perturbative optomechanical coupling coefficients from sampled 1D mode
// fields. Volume integrals are trapezoid sums on the sample grid, surface
// integrals are sums over interface points.
//
// Grid convention: positions are nondecreasing; a position may appear twice
// to carry the left and right limits of a discontinuous profile (the
// segment between the two copies has zero width). Fields are transverse, so
// E is continuous and the normal D term vanishes unless normal-field data is
// supplied explicitly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnd/errors.hpp"

namespace qnd {

using cplx = std::complex<double>;

namespace detail {
inline void check_grid(const std::vector<double>& grid, const char* who) {
  if (grid.size() < 3) throw DomainError(std::string(who) + ": grid needs at least 3 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw DomainError(std::string(who) + ": non-finite grid position");
    if (i == 0) continue;
    if (grid[i] < grid[i - 1]) throw DomainError(std::string(who) + ": grid must be nondecreasing");
    if (i >= 2 && grid[i] == grid[i - 1] && grid[i - 1] == grid[i - 2])
      throw DomainError(std::string(who) + ": a grid position may repeat at most once");
  }
  if (!(grid.back() > grid.front())) throw DomainError(std::string(who) + ": grid has zero span");
}
}  // namespace detail

struct ModeField {
  std::vector<double> grid;  ///< meters
  std::vector<cplx> field;
  double frequency = 0.0;    ///< unperturbed angular frequency, rad/s
  std::string label;

  ModeField() = default;
  ModeField(std::vector<double> x, std::vector<cplx> e, double omega, std::string name = {})
      : grid(std::move(x)), field(std::move(e)), frequency(omega), label(std::move(name)) {
    validate();
  }
  void validate() const {
    detail::check_grid(grid, "ModeField");
    if (field.size() != grid.size()) throw DomainError("ModeField: field and grid lengths differ");
    for (const auto& v : field)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("ModeField: non-finite field sample");
    if (!(frequency > 0.0)) throw DomainError("ModeField: frequency must be > 0");
  }
  double span() const { return grid.back() - grid.front(); }
};

/// One dielectric interface. `normal_sign` is +1 when the outward normal of
/// the dielectric points along +x (dielectric on the left), -1 otherwise.
/// `qu` is the normal displacement of the surface per unit mechanical
/// coordinate.
struct BoundarySpec {
  double position = 0.0;
  int normal_sign = 1;
  double eps_d = 1.0;  ///< dielectric side
  double eps_s = 1.0;  ///< surrounding side
  double qu = 0.0;
};

struct PermittivityPerturbation {
  std::vector<double> epsilon;      ///< relative permittivity samples
  std::vector<double> depsilon_dx;  ///< d eps_r / dx per unit displacement, 1/m
  std::vector<BoundarySpec> boundaries;

  void validate(const std::vector<double>& grid) const {
    if (epsilon.size() != grid.size() || depsilon_dx.size() != grid.size())
      throw DomainError("PermittivityPerturbation: sample count differs from grid");
    for (double e : epsilon)
      if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("PermittivityPerturbation: epsilon must be finite and > 0");
    for (double d : depsilon_dx)
      if (!std::isfinite(d)) throw DomainError("PermittivityPerturbation: non-finite depsilon_dx");
    for (const auto& b : boundaries) {
      if (b.position < grid.front() || b.position > grid.back())
        throw DomainError("PermittivityPerturbation: interface outside the grid range");
      if (b.normal_sign != 1 && b.normal_sign != -1) throw DomainError("PermittivityPerturbation: normal_sign must be +-1");
      if (!(b.eps_d > 0.0) || !(b.eps_s > 0.0)) throw DomainError("PermittivityPerturbation: interface permittivities must be > 0");
    }
  }
};

namespace detail {
inline void same_grid(const ModeField& a, const ModeField& b) {
  if (a.grid != b.grid) throw DomainError("coupling: modes are sampled on different grids");
}
/// Indices of grid samples at `x`: one index, or two for a repeated point.
inline std::pair<std::size_t, std::size_t> grid_point(const std::vector<double>& grid, double x) {
  const double tol = 1e-12 * (grid.back() - grid.front());
  auto it = std::lower_bound(grid.begin(), grid.end(), x - tol);
  if (it == grid.end() || std::abs(*it - x) > tol)
    throw DomainError("boundary_overlap: interface at x = " + std::to_string(x) + " is not on a grid point");
  const auto i = static_cast<std::size_t>(it - grid.begin());
  const auto j = (i + 1 < grid.size() && grid[i + 1] == grid[i]) ? i + 1 : i;
  return {i, j};
}
}  // namespace detail

/// <a| w |b> = integral conj(E_a) w E_b dx by the trapezoid rule.
inline cplx inner_product(const ModeField& a, std::span<const double> w, const ModeField& b) {
  detail::same_grid(a, b);
  if (w.size() != a.grid.size()) throw DomainError("inner_product: weight length differs from grid");
  cplx sum = 0.0;
  for (std::size_t k = 0; k + 1 < a.grid.size(); ++k) {
    const double h = a.grid[k + 1] - a.grid[k];
    if (h == 0.0) continue;
    sum += 0.5 * h * (std::conj(a.field[k]) * w[k] * b.field[k] + std::conj(a.field[k + 1]) * w[k + 1] * b.field[k + 1]);
  }
  return sum;
}

inline cplx inner_product(const ModeField& a, const ModeField& b) {
  const std::vector<double> one(a.grid.size(), 1.0);
  return inner_product(a, one, b);
}

/// Normal displacement-field samples at one interface for a mode pair.
struct NormalField {
  cplx d_a = 0.0;
  cplx d_b = 0.0;
};

/// Moving-boundary surface term sum (q.u) n [deps conj(E_a) E_b - deps^-1
/// conj(D_a) D_b], deps = eps_d - eps_s, deps^-1 = 1/eps_d - 1/eps_s.
/// `normal` (one entry per interface) supplies D_perp; empty means 0.
inline cplx boundary_overlap(const ModeField& a, const ModeField& b, const PermittivityPerturbation& pert,
                             std::span<const NormalField> normal = {}) {
  detail::same_grid(a, b);
  if (!normal.empty() && normal.size() != pert.boundaries.size())
    throw DomainError("boundary_overlap: one normal-field entry per interface required");
  cplx sum = 0.0;
  for (std::size_t k = 0; k < pert.boundaries.size(); ++k) {
    const auto& s = pert.boundaries[k];
    const auto [i, j] = detail::grid_point(a.grid, s.position);
    // E_parallel is continuous; average the one-sided samples.
    const cplx ee = 0.5 * (std::conj(a.field[i]) * b.field[i] + std::conj(a.field[j]) * b.field[j]);
    const cplx dd = normal.empty() ? cplx(0.0) : std::conj(normal[k].d_a) * normal[k].d_b;
    const double deps = s.eps_d - s.eps_s;
    const double deps_inv = 1.0 / s.eps_d - 1.0 / s.eps_s;
    sum += static_cast<double>(s.normal_sign) * s.qu * (deps * ee - deps_inv * dd);
  }
  return sum;
}

/// <a| d eps/dx |b> including the moving-boundary surface terms.
inline cplx perturbation_element(const ModeField& a, const ModeField& b, const PermittivityPerturbation& pert) {
  return inner_product(a, pert.depsilon_dx, b) + boundary_overlap(a, b, pert);
}

/// G1 = -(omega/2) <E| d eps/dx |E> / <E| eps |E>, rad/s/m.
inline double g1_coefficient(const ModeField& mode, const PermittivityPerturbation& pert) {
  mode.validate();
  pert.validate(mode.grid);
  const cplx num = perturbation_element(mode, mode, pert);
  const cplx den = inner_product(mode, pert.epsilon, mode);
  if (!(std::abs(den) > 0.0)) throw DomainError("g1_coefficient: zero mode norm");
  const cplx g = -0.5 * mode.frequency * num / den;
  if (std::abs(g.imag()) > 1e-12 * std::max(std::abs(g), 1e-300) && std::abs(g.imag()) > 1e-300)
    throw NumericalError("g1_coefficient: non-real result");
  return g.real();
}

struct CrossTerm {
  std::string label;
  double omega_j = 0.0;
  double value = 0.0;  ///< G_ij, rad/s/m^2
};

struct SecondOrderCoupling {
  double g1 = 0.0;
  double self_term = 0.0;  ///< 3 G1^2 / omega_i
  std::vector<CrossTerm> cross;
  double total = 0.0;             ///< self_term + sum of cross terms
  double truncation_estimate = 0.0;  ///< |last included cross term|
};

/// G2 = 3 G1^2 / omega_i + sum_j G_ij over the supplied non-degenerate modes.
inline SecondOrderCoupling g2_coefficient(const ModeField& mode, std::span<const ModeField> others,
                                          const PermittivityPerturbation& pert) {
  SecondOrderCoupling out;
  out.g1 = g1_coefficient(mode, pert);
  const double wi = mode.frequency;
  out.self_term = 3.0 * out.g1 * out.g1 / wi;
  const double nii = inner_product(mode, pert.epsilon, mode).real();
  double sum = 0.0;
  for (const auto& other : others) {
    other.validate();
    detail::same_grid(mode, other);
    const double wj = other.frequency;
    if (std::abs(wj - wi) <= 1e-12 * wi)
      throw DomainError("g2_coefficient: mode '" + other.label +
                        "' is degenerate with the target mode; degenerate pairs are handled by the two-mode model");
    const double njj = inner_product(other, pert.epsilon, other).real();
    const double m = std::norm(perturbation_element(other, mode, pert));
    const double g = wi * wi * wi / (wi * wi - wj * wj) * m / (nii * njj);
    out.cross.push_back({other.label, wj, g});
    sum += g;
  }
  out.total = out.self_term + sum;
  out.truncation_estimate = out.cross.empty() ? 0.0 : std::abs(out.cross.back().value);
  return out;
}

enum class SymmetryClass { linear_dominant, quadratic_capable, indeterminate };

inline const char* to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::linear_dominant: return "linear-dominant";
    case SymmetryClass::quadratic_capable: return "quadratic-capable";
    case SymmetryClass::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

/// Classifies a mode/perturbation pair by whether the linear self-overlap
/// vanishes. Without `others`, a nonzero perturbation is taken to couple to
/// some other mode.
inline SymmetryClass classify_symmetry(const ModeField& mode, const PermittivityPerturbation& pert,
                                       std::span<const ModeField> others = {}) {
  const auto& x = mode.grid;
  const double mid = 0.5 * (x.front() + x.back());
  const double tol = 1e-9 * mode.span();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs((x[i] - mid) + (x[x.size() - 1 - i] - mid)) > tol) return SymmetryClass::indeterminate;

  bool any = false;
  for (double d : pert.depsilon_dx) any = any || d != 0.0;
  for (const auto& b : pert.boundaries) any = any || (b.qu != 0.0 && b.eps_d != b.eps_s);
  if (!any) return SymmetryClass::indeterminate;

  const double g1 = g1_coefficient(mode, pert);
  if (std::abs(g1) >= 1e-8 * mode.frequency / mode.span()) return SymmetryClass::linear_dominant;
  if (others.empty()) return SymmetryClass::quadratic_capable;
  const auto g2 = g2_coefficient(mode, others, pert);
  double cross = 0.0;
  for (const auto& c : g2.cross) cross += c.value;
  return cross != 0.0 ? SymmetryClass::quadratic_capable : SymmetryClass::indeterminate;
}

}  // namespace qnd
