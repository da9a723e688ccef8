#pragma once

// Dense operators on a truncated Fock space. Hamiltonians are stored as H/hbar
// (rad/s) everywhere in the library.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnd/errors.hpp"
#include "qnd/system.hpp"

namespace qnd {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class FockOperator {
 public:
  FockOperator() = default;
  explicit FockOperator(Matrix m, std::string label = {}) : m_(std::move(m)), label_(std::move(label)) {
    if (m_.rows() != m_.cols()) throw DomainError("FockOperator: matrix must be square");
    if (!m_.allFinite()) throw DomainError("FockOperator: non-finite entries");
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  const std::string& label() const { return label_; }

  FockOperator adjoint() const { return FockOperator(m_.adjoint(), label_.empty() ? "" : label_ + "^dag"); }

  friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    same_dim(a, b);
    return FockOperator(a.m_ * b.m_);
  }
  friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    same_dim(a, b);
    return FockOperator(a.m_ + b.m_);
  }
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
    same_dim(a, b);
    return FockOperator(a.m_ - b.m_);
  }
  friend FockOperator operator*(cplx s, const FockOperator& a) { return FockOperator(s * a.m_); }
  friend FockOperator operator*(double s, const FockOperator& a) { return FockOperator(s * a.m_); }

  FockOperator with_label(std::string label) const { return FockOperator(m_, std::move(label)); }

  /// Largest absolute matrix element.
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

 private:
  static void same_dim(const FockOperator& a, const FockOperator& b) {
    if (a.dim() != b.dim()) throw DomainError("FockOperator: dimension mismatch");
  }
  Matrix m_;
  std::string label_;
};

inline FockOperator identity(int dim) { return FockOperator(Matrix::Identity(dim, dim), "1"); }

inline FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

/// a (x) b, with the first factor as the slow index.
inline FockOperator kron(const FockOperator& a, const FockOperator& b) {
  const int da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return FockOperator(std::move(out));
}

/// Diagonal operator f(n) on |0>..|dim-1>. Used for number-conserving
/// products whose truncated matrix product would be wrong at the top state.
template <typename F>
FockOperator number_function(int dim, F&& f, std::string label = {}) {
  Matrix m = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = f(static_cast<double>(n));
  return FockOperator(std::move(m), std::move(label));
}

struct Ladder {
  FockOperator b;
  FockOperator b_dag;
  FockOperator n;
};

inline Ladder ladder(int dim) {
  if (dim < 2) throw DomainError("ladder: truncation dimension must be >= 2");
  Matrix b = Matrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
  FockOperator bo(b, "b");
  FockOperator bd = bo.adjoint().with_label("b^dag");
  return {bo, bd, (bd * bo).with_label("n")};
}

/// Smallest truncation whose Bose-Einstein tail beyond it is below `tail`.
inline int suggest_dimension(double nbar, double tail = 1e-6, int minimum = 2) {
  if (!(nbar >= 0.0)) throw DomainError("suggest_dimension: nbar must be >= 0");
  if (nbar == 0.0) return minimum;
  // P(N >= d) = (nbar / (1 + nbar))^d
  const double q = nbar / (1.0 + nbar);
  const int d = static_cast<int>(std::ceil(std::log(tail) / std::log(q)));
  return std::max(minimum, d);
}

/// Density matrix with checked invariants (Hermitian, unit trace). Positivity
/// is certified on demand through min_eigenvalue().
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() < 1) throw DomainError("DensityMatrix: must be square");
    if (!rho_.allFinite()) throw DomainError("DensityMatrix: non-finite entries");
    if (hermiticity_error() > 1e-12) throw DomainError("DensityMatrix: not Hermitian");
    if (trace_error() > 1e-10) throw DomainError("DensityMatrix: trace differs from 1");
  }

  static DensityMatrix pure(const Vector& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw DomainError("DensityMatrix::pure: zero vector");
    const Vector v = psi / norm;
    return DensityMatrix(v * v.adjoint());
  }
  static DensityMatrix fock(int dim, int k) {
    if (k < 0 || k >= dim) throw DomainError("DensityMatrix::fock: index outside truncation");
    Matrix m = Matrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
  }
  /// Diagonal state from populations, which must sum to 1 within 1e-10.
  static DensityMatrix diagonal(std::span<const double> p) {
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw DomainError("DensityMatrix::diagonal: negative population");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw DomainError("DensityMatrix::diagonal: populations must sum to 1");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = p[i];
    return DensityMatrix(std::move(m));
  }
  /// Bose-Einstein state with mean nbar, renormalized on the truncation.
  static DensityMatrix thermal(int dim, double nbar) {
    if (!(nbar >= 0.0)) throw DomainError("DensityMatrix::thermal: nbar must be >= 0");
    std::vector<double> p(dim);
    const double q = nbar / (1.0 + nbar);
    double w = 1.0, sum = 0.0;
    for (int n = 0; n < dim; ++n, w *= q) sum += (p[n] = w);
    for (double& x : p) x /= sum;
    return diagonal(p);
  }

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }

  std::vector<double> populations() const {
    std::vector<double> p(dim());
    for (int i = 0; i < dim(); ++i) p[i] = rho_(i, i).real();
    return p;
  }
  double trace_error() const { return std::abs(rho_.trace() - cplx(1.0, 0.0)); }
  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Matrix rho_;
};

/// D[o] rho = 2 o rho o^dag - o^dag o rho - rho o^dag o.
inline Matrix dissipator_action(const FockOperator& o, const Matrix& rho) {
  if (o.dim() != rho.rows() || rho.rows() != rho.cols()) throw DomainError("dissipator_action: shape mismatch");
  const Matrix& a = o.matrix();
  const Matrix ada = a.adjoint() * a;
  return 2.0 * a * rho * a.adjoint() - ada * rho - rho * ada;
}

struct HamiltonianSplit {
  FockOperator h0;       ///< commutes with 1 (x) n
  FockOperator h_prime;  ///< contaminating part
};

/// QND split of the quadratically coupled Hamiltonian on cavity (x) mechanics
/// (cavity is the slow index). `omega_c` is the cavity frequency in the frame
/// of interest; H/hbar in rad/s.
inline HamiltonianSplit hamiltonian_split(const SystemParams& p, int dim_c, int dim_m, double omega_c) {
  if (dim_c < 2 || dim_m < 2) throw DomainError("hamiltonian_split: dimensions must be >= 2");
  const Ladder a = ladder(dim_c);
  const Ladder b = ladder(dim_m);
  const FockOperator n_c = a.n;
  // (b^dag b + 1/2) and omega_m b^dag b are diagonal; b b and b^dag b^dag are
  // exact in the truncation.
  const FockOperator shift = number_function(dim_m, [&](double n) { return omega_c + p.g2 * (n + 0.5); });
  FockOperator h0 = kron(n_c, shift) + kron(identity(dim_c), p.omega_m * b.n);
  const FockOperator bb = b.b * b.b;
  const FockOperator bdbd = b.b_dag * b.b_dag;
  FockOperator hp = kron(n_c, p.g1 * (b.b + b.b_dag) + (0.5 * p.g2) * (bb + bdbd));
  return {h0.with_label("H0"), hp.with_label("H'")};
}

inline HamiltonianSplit hamiltonian_split(const SystemParams& p, int dim_c, int dim_m) {
  return hamiltonian_split(p, dim_c, dim_m, p.delta);
}

}  // namespace qnd
