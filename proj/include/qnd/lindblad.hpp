#pragma once

// Lindblad generators for the phonon-only reduced master equation and for the
// full cavity + mechanics model it approximates, plus time integration,
// steady states and transition-rate readout.
//
// Convention: d rho/dt = -i [H, rho] + sum_k (w_k / 2) D[o_k] rho, with H in
// rad/s. With this normalization w_k |<m|o_k|n>|^2 is the n -> m jump rate.

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qnd/cavity_response.hpp"
#include "qnd/errors.hpp"
#include "qnd/fock.hpp"
#include "qnd/rates.hpp"
#include "qnd/system.hpp"

namespace qnd {

enum class ChannelKind { thermal_down, thermal_up, opt_down1, opt_up1, opt_down2, opt_up2, dephasing, cavity_decay, other };

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::thermal_down: return "thermal_down";
    case ChannelKind::thermal_up: return "thermal_up";
    case ChannelKind::opt_down1: return "opt_down1";
    case ChannelKind::opt_up1: return "opt_up1";
    case ChannelKind::opt_down2: return "opt_down2";
    case ChannelKind::opt_up2: return "opt_up2";
    case ChannelKind::dephasing: return "dephasing";
    case ChannelKind::cavity_decay: return "cavity_decay";
    case ChannelKind::other: return "other";
  }
  return "other";
}

/// Change in phonon number caused by one jump of this kind.
inline int phonon_change(ChannelKind k) {
  switch (k) {
    case ChannelKind::thermal_down:
    case ChannelKind::opt_down1: return -1;
    case ChannelKind::thermal_up:
    case ChannelKind::opt_up1: return 1;
    case ChannelKind::opt_down2: return -2;
    case ChannelKind::opt_up2: return 2;
    default: return 0;
  }
}

struct Channel {
  FockOperator op;
  double weight = 0.0;  ///< rad/s, multiplies D[op] / 2
  ChannelKind kind = ChannelKind::other;
};

class LindbladGenerator {
 public:
  using Sparse = Eigen::SparseMatrix<cplx>;

  /// `cavity_dim` is 1 for phonon-only generators; the full space is
  /// cavity (x) phonon with the cavity as slow index. `rate_scale` sets the
  /// dimensionless time used by the integrator.
  LindbladGenerator(FockOperator hamiltonian, std::vector<Channel> channels, int cavity_dim, int phonon_dim,
                    double rate_scale)
      : h_(std::move(hamiltonian)),
        channels_(std::move(channels)),
        cavity_dim_(cavity_dim),
        phonon_dim_(phonon_dim),
        rate_scale_(rate_scale) {
    if (cavity_dim_ < 1 || phonon_dim_ < 2) throw DomainError("LindbladGenerator: bad dimensions");
    if (h_.dim() != cavity_dim_ * phonon_dim_) throw DomainError("LindbladGenerator: Hamiltonian dimension mismatch");
    if (!(rate_scale_ > 0.0)) throw DomainError("LindbladGenerator: rate scale must be > 0");
    const double herm = (h_.matrix() - h_.matrix().adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12 * std::max(1.0, h_.max_abs())) throw DomainError("LindbladGenerator: Hamiltonian not Hermitian");
    for (const auto& c : channels_) {
      if (c.op.dim() != dim()) throw DomainError("LindbladGenerator: channel dimension mismatch");
      if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw DomainError("LindbladGenerator: channel weight must be >= 0");
    }
    build_cache();
  }

  int dim() const { return cavity_dim_ * phonon_dim_; }
  int cavity_dim() const { return cavity_dim_; }
  int phonon_dim() const { return phonon_dim_; }
  double rate_scale() const { return rate_scale_; }
  const FockOperator& hamiltonian() const { return h_; }
  const std::vector<Channel>& channels() const { return channels_; }

  double max_weight() const {
    double m = 0.0;
    for (const auto& c : channels_) m = std::max(m, c.weight);
    return m;
  }

  /// Generator restricted to the listed channel kinds, optionally without H.
  LindbladGenerator restricted(std::initializer_list<ChannelKind> keep, bool keep_hamiltonian = true) const {
    std::vector<Channel> kept;
    for (const auto& c : channels_)
      if (std::find(keep.begin(), keep.end(), c.kind) != keep.end()) kept.push_back(c);
    FockOperator h = keep_hamiltonian ? h_ : FockOperator(Matrix::Zero(dim(), dim()));
    return LindbladGenerator(std::move(h), std::move(kept), cavity_dim_, phonon_dim_, rate_scale_);
  }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim()) throw DomainError("LindbladGenerator::apply: shape mismatch");
    Matrix out(dim(), dim());
    apply_raw(rho, out);
    return out;
  }

  /// out = L(rho); no shape checks.
  void apply_raw(const Matrix& rho, Matrix& out) const {
    // L rho = K rho + rho K^dag + sum w a rho a^dag, K = -iH - 1/2 sum w a^dag a
    out.noalias() = k_ * rho;
    Matrix tmp = k_ * rho.adjoint();
    out += tmp.adjoint();
    for (std::size_t i = 0; i < jump_.size(); ++i) {
      tmp.noalias() = jump_[i] * rho;
      Matrix t2 = jump_[i] * tmp.adjoint();
      out += weights_[i] * t2.adjoint();
    }
  }

  /// Superoperator matrix on column-stacked vec(rho) (index i + j*dim).
  Matrix superoperator() const {
    const int d = dim();
    Matrix s(d * d, d * d);
    Matrix e = Matrix::Zero(d, d), out(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        e(i, j) = 1.0;
        apply_raw(e, out);
        e(i, j) = 0.0;
        s.col(i + j * d) = Eigen::Map<const Vector>(out.data(), d * d);
      }
    return s;
  }

  /// R(m, n) = <m| L(|n><n|) |m>: the population (birth-death) matrix on the
  /// full basis.
  Eigen::MatrixXd population_restriction() const {
    const int d = dim();
    Eigen::MatrixXd r(d, d);
    Matrix e = Matrix::Zero(d, d), out(d, d);
    for (int n = 0; n < d; ++n) {
      e(n, n) = 1.0;
      apply_raw(e, out);
      e(n, n) = 0.0;
      for (int m = 0; m < d; ++m) r(m, n) = out(m, m).real();
    }
    return r;
  }

  /// Non-Hermitian effective Hamiltonian H - (i/2) sum w a^dag a used by the
  /// quantum-jump unraveling.
  Matrix effective_hamiltonian() const { return Matrix(cplx(0.0, 1.0) * Matrix(k_)); }

 private:
  void build_cache() {
    Matrix k = cplx(0.0, -1.0) * h_.matrix();
    jump_.clear();
    weights_.clear();
    for (const auto& c : channels_) {
      if (c.weight == 0.0) continue;
      const Matrix& a = c.op.matrix();
      k -= 0.5 * c.weight * (a.adjoint() * a);
      jump_.push_back(a.sparseView(0.0, 0.0));
      weights_.push_back(c.weight);
    }
    k_ = k.sparseView(0.0, 0.0);
  }

  FockOperator h_;
  std::vector<Channel> channels_;
  int cavity_dim_;
  int phonon_dim_;
  double rate_scale_;
  Sparse k_;
  std::vector<Sparse> jump_;
  std::vector<double> weights_;
};

/// Photon-mediated coherent part H_r / hbar (without the factor N), built
/// with exact diagonal matrix elements: b^dag b b^dag b = n^2,
/// b b b^dag b^dag = (n+1)(n+2), b^dag b^dag b b = n(n-1).
inline FockOperator lamb_shift_hamiltonian(const SystemParams& p, int dim) {
  const CavityResponse chi(p.kappa, p.delta, 1.0);
  const double im_m = chi.susceptibility(p.omega_m).imag() + chi.susceptibility(-p.omega_m).imag();
  const double im_0 = chi.susceptibility(0.0).imag();
  const double im_2p = chi.susceptibility(2.0 * p.omega_m).imag();
  const double im_2m = chi.susceptibility(-2.0 * p.omega_m).imag();
  const double g1sq = p.g1 * p.g1, g2sq = p.g2 * p.g2;
  return number_function(
      dim,
      [&](double n) {
        return g1sq * im_m * n + g2sq * im_0 * n * n + 0.25 * g2sq * (im_2p * (n + 1.0) * (n + 2.0) + im_2m * n * (n - 1.0));
      },
      "H_r");
}

/// Phonon-only master equation after adiabatic elimination of the cavity.
inline LindbladGenerator reduced_generator(const SystemParams& p, int dim) {
  if (dim < 2) throw DomainError("reduced_generator: dimension must be >= 2");
  const CavityResponse cav(p);
  const double nbar = cav.nbar();
  const Ladder l = ladder(dim);
  const double g1sq = p.g1 * p.g1, g2sq = p.g2 * p.g2;
  const FockOperator bb = l.b * l.b;
  const FockOperator bdbd = l.b_dag * l.b_dag;

  std::vector<Channel> ch;
  ch.push_back({l.b, p.gamma_m * (p.nbar_th() + 1.0), ChannelKind::thermal_down});
  ch.push_back({l.b_dag, p.gamma_m * p.nbar_th(), ChannelKind::thermal_up});
  // w = 2 N g^2 Re chi(omega) = g^2 S_NN(-omega)
  ch.push_back({l.b_dag, g1sq * cav.photon_spectral_density(-p.omega_m), ChannelKind::opt_up1});
  ch.push_back({l.b, g1sq * cav.photon_spectral_density(p.omega_m), ChannelKind::opt_down1});
  ch.push_back({l.n, 2.0 * nbar * g2sq * cav.susceptibility(0.0).real(), ChannelKind::dephasing});
  ch.push_back({bdbd, 0.25 * g2sq * cav.photon_spectral_density(-2.0 * p.omega_m), ChannelKind::opt_up2});
  ch.push_back({bb, 0.25 * g2sq * cav.photon_spectral_density(2.0 * p.omega_m), ChannelKind::opt_down2});

  FockOperator h = nbar * lamb_shift_hamiltonian(p, dim);
  return LindbladGenerator(h.with_label("N H_r"), std::move(ch), 1, dim, p.gamma_m);
}

/// Full cavity-fluctuation (x) mechanics model in the displaced, drive-rotating
/// frame, with d^dag d terms dropped from the interaction. The classical
/// amplitude is sqrt(N), taken real.
inline LindbladGenerator bipartite_generator(const SystemParams& p, int dim_c, int dim_m) {
  if (dim_c < 2 || dim_m < 2) throw DomainError("bipartite_generator: dimensions must be >= 2");
  const double amp = std::sqrt(mean_photon_number(p));
  const Ladder d = ladder(dim_c);
  const Ladder b = ladder(dim_m);
  const FockOperator one_c = identity(dim_c), one_m = identity(dim_m);
  const FockOperator mech = p.g1 * (b.b + b.b_dag) + (0.5 * p.g2) * (2.0 * b.n + b.b * b.b + b.b_dag * b.b_dag);
  FockOperator h = kron(p.delta * d.n, one_m) + kron(one_c, p.omega_m * b.n) + amp * kron(d.b + d.b_dag, mech);

  std::vector<Channel> ch;
  ch.push_back({kron(d.b, one_m), p.kappa, ChannelKind::cavity_decay});
  ch.push_back({kron(one_c, b.b), p.gamma_m * (p.nbar_th() + 1.0), ChannelKind::thermal_down});
  ch.push_back({kron(one_c, b.b_dag), p.gamma_m * p.nbar_th(), ChannelKind::thermal_up});
  return LindbladGenerator(h.with_label("H_bipartite"), std::move(ch), dim_c, dim_m, p.kappa);
}

/// Phonon-number marginal of a (possibly bipartite) density matrix.
inline std::vector<double> phonon_populations(const Matrix& rho, int cavity_dim, int phonon_dim) {
  std::vector<double> p(phonon_dim, 0.0);
  for (int c = 0; c < cavity_dim; ++c)
    for (int n = 0; n < phonon_dim; ++n) p[n] += rho(c * phonon_dim + n, c * phonon_dim + n).real();
  return p;
}

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool keep_snapshots = false;
  bool certify_positivity = true;  ///< eigenvalue check at every grid point
  long max_steps = 50'000'000;
};

struct EvolutionResult {
  std::vector<double> times;                    ///< seconds
  std::vector<std::vector<double>> populations; ///< phonon marginal p_n(t)
  std::vector<Matrix> snapshots;                ///< full rho at grid points, if kept
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  long steps = 0;

  /// A run whose state lost positivity beyond -1e-6 is not trusted.
  bool failed() const { return min_eigenvalue < -1e-6; }
};

/// Adaptive Dormand-Prince integration in dimensionless time
/// tau = rate_scale * t. No trace renormalization is applied; drift is
/// reported in the diagnostics.
inline EvolutionResult evolve(const LindbladGenerator& gen, const DensityMatrix& rho0, double t_final, int grid,
                              const EvolveOptions& opt = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<cplx>;
  if (rho0.dim() != gen.dim()) throw DomainError("evolve: initial state dimension mismatch");
  if (!(t_final > 0.0)) throw DomainError("evolve: t_final must be > 0");
  if (grid < 1) throw DomainError("evolve: grid must be >= 1");

  const int d = gen.dim();
  const double scale = gen.rate_scale();
  const double tau_final = t_final * scale;
  const double inv_scale = 1.0 / scale;

  Matrix rho_in(d, d), drho(d, d);
  auto system = [&](const State& x, State& dx, double) {
    rho_in = Eigen::Map<const Matrix>(x.data(), d, d);
    gen.apply_raw(rho_in, drho);
    Eigen::Map<Matrix>(dx.data(), d, d) = inv_scale * drho;
  };

  EvolutionResult res;
  res.min_eigenvalue = 1.0;
  auto record = [&](double t, const State& x) {
    const Eigen::Map<const Matrix> rho(x.data(), d, d);
    res.times.push_back(t);
    res.populations.push_back(phonon_populations(rho, gen.cavity_dim(), gen.phonon_dim()));
    res.max_trace_error = std::max(res.max_trace_error, std::abs(rho.trace() - cplx(1.0, 0.0)));
    res.max_hermiticity_error = std::max(res.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (opt.certify_positivity) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
      res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    if (opt.keep_snapshots) res.snapshots.emplace_back(rho);
  };

  State x(rho0.matrix().data(), rho0.matrix().data() + d * d);
  record(0.0, x);

  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x, 0.0, std::min(1e-3, tau_final / grid));
  State out(x.size());
  const double min_dt = 1e-14 * tau_final;
  auto stiffness_error = [&](const std::string& why) {
    std::ostringstream os;
    os << "evolve: " << why << " at t = " << stepper.current_time() / scale
       << " s; stiffness ratio (max channel weight x t_final) = " << gen.max_weight() * t_final;
    return NumericalError(os.str());
  };

  for (int k = 1; k <= grid; ++k) {
    const double tau_k = tau_final * static_cast<double>(k) / grid;
    while (stepper.current_time() < tau_k) {
      try {
        stepper.do_step(system);
      } catch (const odeint::step_adjustment_error&) {
        throw stiffness_error("step-size adjustment failed");
      }
      if (++res.steps > opt.max_steps) throw stiffness_error("step budget exhausted");
      if (stepper.current_time_step() < min_dt) throw stiffness_error("step-size underflow");
    }
    stepper.calc_state(tau_k, out);
    record(tau_k / scale, out);
  }
  return res;
}

/// Unique fixed point of the generator from the null space of its
/// superoperator.
inline DensityMatrix steady_state(const LindbladGenerator& gen) {
  const int d = gen.dim();
  const Matrix s = gen.superoperator() / gen.rate_scale();
  Eigen::FullPivLU<Matrix> lu(s);
  lu.setThreshold(1e-10);
  const auto kernel_dim = s.cols() - lu.rank();
  if (kernel_dim != 1) {
    std::ostringstream os;
    os << "steady_state: non-unique steady state (null space dimension " << kernel_dim << ")";
    throw NumericalError(os.str());
  }
  const Vector v = lu.kernel().col(0);
  Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint());
  const double resid = gen.apply(rho).cwiseAbs().maxCoeff() / gen.rate_scale();
  if (resid > 1e-10) throw NumericalError("steady_state: residual too large");
  DensityMatrix out(rho);
  if (out.min_eigenvalue() < -1e-10) throw NumericalError("steady_state: fixed point is not positive");
  return out;
}

struct BasisState {
  int cavity = 0;
  int phonon = 0;
};

struct RateWindow {
  double t_start = 0.0;  ///< seconds; fit uses samples with t >= t_start
  double t_end = 0.0;
  int samples = 200;
};

struct RateFit {
  double rate = 0.0;  ///< slope of the target population, 1/s
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Fits the initial linear growth of the phonon population `to_phonon`
/// (mechanics marginal) starting from the pure basis state `from`.
inline RateFit extract_transition_rate(const LindbladGenerator& gen, BasisState from, int to_phonon, RateWindow w,
                                       double min_r_squared = 0.98, const EvolveOptions& opt = {}) {
  if (from.cavity < 0 || from.cavity >= gen.cavity_dim() || from.phonon < 0 || from.phonon >= gen.phonon_dim())
    throw DomainError("extract_transition_rate: initial state outside truncation");
  if (to_phonon < 0 || to_phonon >= gen.phonon_dim()) throw DomainError("extract_transition_rate: target outside truncation");
  if (!(w.t_end > w.t_start) || w.t_start < 0.0 || w.samples < 3) throw DomainError("extract_transition_rate: bad window");

  EvolveOptions o = opt;
  o.certify_positivity = false;
  const auto res = evolve(gen, DensityMatrix::fock(gen.dim(), from.cavity * gen.phonon_dim() + from.phonon), w.t_end,
                          w.samples, o);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    if (res.times[i] < w.t_start) continue;
    const double x = res.times[i], y = res.populations[i][to_phonon];
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
    ++cnt;
  }
  if (cnt < 3) throw DomainError("extract_transition_rate: fewer than 3 samples in the fit window");
  const double vx = sxx - sx * sx / cnt, vy = syy - sy * sy / cnt, cxy = sxy - sx * sy / cnt;
  RateFit fit;
  fit.rate = cxy / vx;
  fit.intercept = (sy - fit.rate * sx) / cnt;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 0.0;
  if (fit.r_squared < min_r_squared) {
    std::ostringstream os;
    os << "extract_transition_rate: population growth is not linear in the window (R^2 = " << fit.r_squared
       << "); use a shorter window";
    throw NumericalError(os.str());
  }
  return fit;
}

}  // namespace qnd
