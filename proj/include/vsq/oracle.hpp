#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vsq/boson_algebra.hpp"
#include "vsq/determinants.hpp"
#include "vsq/entropy.hpp"
#include "vsq/error.hpp"
#include "vsq/linalg.hpp"
#include "vsq/model.hpp"

namespace vsq {

/// Index layout of (electron states) x (Fock states per mode): electron index fastest, then
/// mode 0, mode 1, ... each with digits 0..n_max.
struct ProductLayout {
  int n_electron_states = 1;
  int n_max = 10;
  int n_modes = 0;

  long long n_boson_states() const {
    long long d = 1;
    for (int a = 0; a < n_modes; ++a) d *= n_max + 1;
    return d;
  }
  long long dim() const { return n_electron_states * n_boson_states(); }
  long long stride(int mode) const {
    long long s = 1;
    for (int a = 0; a < mode; ++a) s *= n_max + 1;
    return s;
  }
};

/// The untransformed electron-boson Hamiltonian on the product of the determinant space (in the
/// system's own orbital basis) and a truncated Fock space per mode:
///   H = H_e [+ 1/2 sum_a D_a^2] + sum_a sqrt(omega_a/2) D_a (b_a + b_a^dag) + sum_a omega_a (n_a + 1/2).
/// Dense below `dense_limit`, applied matrix-free otherwise.
class FockSpaceOperator {
 public:
  FockSpaceOperator(const ElectronBosonSystem& sys, int n_max, long long max_dim = 2'000'000,
                    long long dense_limit = 2000)
      : space_(sys.n_orbitals, sys.n_alpha(), sys.n_beta()) {
    sys.validate();
    if (n_max < 1) throw ValidationError("n_max must be >= 1");
    layout_ = {space_.size(), n_max, sys.n_modes()};
    if (layout_.dim() > max_dim)
      throw ValidationError("product space dimension " + std::to_string(layout_.dim()) + " exceeds the limit " +
                            std::to_string(max_dim));
    he_ = electron_hamiltonian(space_, sys.h, sys.eri, sys.e_core);
    for (const auto& m : sys.modes) {
      Matrix d = one_body_operator(space_, m.coupling);
      if (sys.include_dse) he_ += 0.5 * d * d;
      Matrix off = d;
      off.diagonal().setZero();
      const bool diag = max_abs(off) == 0.0;
      coupling_.push_back(std::move(d));
      diagonal_.push_back(diag);
      omega_.push_back(m.omega);
    }
    zero_point_ = sys.include_zero_point;
    if (hermiticity_defect(he_) > 1e-10) throw Error("electronic Hamiltonian is not Hermitian");
    if (layout_.dim() <= dense_limit) dense_ = build_dense();
  }

  const ProductLayout& layout() const noexcept { return layout_; }
  const DeterminantSpace& electrons() const noexcept { return space_; }
  long long dim() const noexcept { return layout_.dim(); }
  bool is_dense() const noexcept { return dense_.has_value(); }
  const Matrix& electron_part() const noexcept { return he_; }

  /// y = H x.
  void apply(const Vector& x, Vector& y) const {
    if (dense_) {
      y.noalias() = *dense_ * x;
      return;
    }
    const int ne = layout_.n_electron_states;
    const long long nb = layout_.n_boson_states();
    y.resize(x.size());
    Eigen::Map<const Matrix> X(x.data(), ne, nb);
    Eigen::Map<Matrix> Y(y.data(), ne, nb);
    Y.noalias() = he_ * X;
    const int nm = layout_.n_modes;
    const int nd = layout_.n_max + 1;
    for (long long k = 0; k < nb; ++k) {
      long long rest = k;
      double w = 0.0;
      for (int a = 0; a < nm; ++a) {
        w += omega_[a] * ((rest % nd) + (zero_point_ ? 0.5 : 0.0));
        rest /= nd;
      }
      Y.col(k) += w * X.col(k);
    }
    Matrix Z;
    for (int a = 0; a < nm; ++a) {
      const long long st = layout_.stride(a);
      const double c0 = std::sqrt(0.5 * omega_[a]);
      if (!diagonal_[a]) Z.noalias() = coupling_[a] * X;
      const Vector dg = coupling_[a].diagonal();
      for (long long k = 0; k < nb; ++k) {
        const long long n = (k / st) % nd;
        if (n == layout_.n_max) continue;
        const long long k2 = k + st;
        const double c = c0 * std::sqrt(static_cast<double>(n + 1));
        if (diagonal_[a]) {
          Y.col(k2).array() += c * dg.array() * X.col(k).array();
          Y.col(k).array() += c * dg.array() * X.col(k2).array();
        } else {
          Y.col(k2) += c * Z.col(k);
          Y.col(k) += c * Z.col(k2);
        }
      }
    }
  }

  /// Explicit matrix (only sensible for small dimensions).
  Matrix dense() const {
    if (dense_) return *dense_;
    return build_dense();
  }

 private:
  Matrix build_dense() const {
    const long long d = layout_.dim();
    Matrix H(d, d);
    Vector e = Vector::Zero(d), y;
    auto self = *this;
    self.dense_.reset();
    for (long long j = 0; j < d; ++j) {
      e(j) = 1.0;
      self.apply(e, y);
      H.col(j) = y;
      e(j) = 0.0;
    }
    if (hermiticity_defect(H) > 1e-10) throw Error("assembled Hamiltonian is not Hermitian");
    return 0.5 * (H + H.transpose());
  }

  DeterminantSpace space_;
  ProductLayout layout_;
  Matrix he_;
  std::vector<Matrix> coupling_;
  std::vector<bool> diagonal_;
  std::vector<double> omega_;
  bool zero_point_ = true;
  std::optional<Matrix> dense_;
};

inline FockSpaceOperator build_full_hamiltonian(const ElectronBosonSystem& sys, int n_max,
                                                long long max_dim = 2'000'000) {
  return FockSpaceOperator(sys, n_max, max_dim);
}

struct GroundState {
  double energy = 0.0;
  Vector psi;
  double residual = 0.0;
  int matvecs = 0;
};

struct LanczosOptions {
  int krylov = 16;
  int keep = 4;
  int max_restarts = 400;
  double tol = 1e-9;
  unsigned seed = 12345;
  double start_noise = 1e-2;  ///< relative random admixture in the start vector
};

/// Lowest eigenpair of a symmetric operator given as a matvec: thick-restart Lanczos with full
/// reorthogonalization; the restart keeps the lowest `keep` Ritz vectors plus the residual
/// direction. Column j of the projected matrix is obtained from the full projection of A v_j.
template <class Apply>
GroundState lanczos_ground_state(Apply&& apply, long long dim, const Vector& guess, const LanczosOptions& opt = {}) {
  GroundState gs;
  if (dim <= 2LL * opt.krylov) {
    Matrix A(dim, dim);
    Vector e = Vector::Zero(dim), y(dim);
    for (long long j = 0; j < dim; ++j) {
      e(j) = 1.0;
      apply(e, y);
      A.col(j) = y;
      e(j) = 0.0;
    }
    const auto es = symmetric_eigen(A);
    gs.energy = es.values(0);
    gs.psi = es.vectors.col(0);
    gs.matvecs = static_cast<int>(dim);
    gs.residual = (A * gs.psi - gs.energy * gs.psi).norm();
    return gs;
  }
  const int m = opt.krylov;
  const int keep = std::clamp(opt.keep, 1, m - 2);
  Matrix V(dim, m + 1);
  Matrix T = Matrix::Zero(m, m);
  Vector w(dim);

  Vector v0 = guess;
  if (v0.size() != dim || v0.norm() == 0.0) v0 = Vector::Ones(dim);
  {
    // A small deterministic perturbation keeps every symmetry sector reachable.
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double scale = opt.start_noise * v0.norm() / std::sqrt(static_cast<double>(dim));
    for (long long i = 0; i < dim; ++i) v0(i) += scale * u(rng);
  }
  V.col(0) = v0.normalized();
  int filled = 0;
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    for (int j = filled; j < m; ++j) {
      apply(V.col(j), w);
      ++gs.matvecs;
      const auto basis = V.leftCols(j + 1);
      const Vector h = basis.transpose() * w;
      T.col(j).head(j + 1) = h;
      T.row(j).head(j + 1) = h.transpose();
      const double wn = w.norm();
      w.noalias() -= basis * h;
      double beta = w.norm();
      if (beta < 0.7 * wn) {
        // Second Gram-Schmidt pass only when cancellation was significant.
        w.noalias() -= basis * (basis.transpose() * w);
        beta = w.norm();
      }
      if (beta < 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        // Invariant subspace reached; continue with a fresh orthogonal direction.
        for (long long i = 0; i < dim; ++i) w(i) = u(rng);
        for (int pass = 0; pass < 2; ++pass) w.noalias() -= basis * (basis.transpose() * w);
        beta = w.norm();
      }
      V.col(j + 1) = w / beta;
    }
    const auto es = symmetric_eigen(T);
    apply(V.col(m), w);
    ++gs.matvecs;
    const double res = std::abs((V.leftCols(m).transpose() * w).dot(es.vectors.col(0)));
    gs.energy = es.values(0);
    if (res < 0.1 * opt.tol || restart == opt.max_restarts) {
      gs.psi = (V.leftCols(m) * es.vectors.col(0)).normalized();
      Vector hp(dim);
      apply(gs.psi, hp);
      ++gs.matvecs;
      gs.energy = gs.psi.dot(hp);
      gs.residual = (hp - gs.energy * gs.psi).norm();
      if (gs.residual < opt.tol) return gs;
    }
    const Matrix kept = V.leftCols(m) * es.vectors.leftCols(keep);
    const Vector last = V.col(m);
    V.leftCols(keep) = kept;
    V.col(keep) = last;
    T.setZero();
    for (int i = 0; i < keep; ++i) T(i, i) = es.values(i);
    filled = keep;
  }
  throw ConvergenceError("Lanczos did not reach residual " + std::to_string(opt.tol) + " (last " +
                         std::to_string(gs.residual) + ")");
}

/// Copy a state into a layout with a larger n_max (same electrons and modes), zero padded.
inline Vector embed_state(const Vector& psi, const ProductLayout& from, const ProductLayout& to) {
  if (from.n_electron_states != to.n_electron_states || from.n_modes != to.n_modes || to.n_max < from.n_max)
    throw ValidationError("embed_state: incompatible layouts");
  Vector out = Vector::Zero(to.dim());
  const int ne = from.n_electron_states;
  for (long long k = 0; k < from.n_boson_states(); ++k) {
    long long rest = k, k2 = 0;
    for (int a = 0; a < from.n_modes; ++a) {
      k2 += (rest % (from.n_max + 1)) * to.stride(a);
      rest /= from.n_max + 1;
    }
    out.segment(k2 * ne, ne) = psi.segment(k * ne, ne);
  }
  return out;
}

/// Lowest eigenpair; dense diagonalization when the operator is stored densely.
inline GroundState ground_state(const FockSpaceOperator& H, const LanczosOptions& opt = {},
                                const Vector& guess = Vector()) {
  if (H.is_dense()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H.dense());
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    GroundState gs;
    gs.energy = es.eigenvalues()(0);
    gs.psi = es.eigenvectors().col(0);
    Vector hp;
    H.apply(gs.psi, hp);
    gs.residual = (hp - gs.energy * gs.psi).norm();
    if (gs.residual > opt.tol) throw ConvergenceError("dense eigenpair residual above tolerance");
    return gs;
  }
  Vector start = guess;
  if (start.size() != H.dim()) {
    // Electronic ground level times the boson vacuum; degenerate partners enter with distinct
    // weights so that no symmetry sector is missed.
    const auto ee = symmetric_eigen(H.electron_part());
    start = Vector::Zero(H.dim());
    const int ne = H.layout().n_electron_states;
    for (int k = 0; k < ne && ee.values(k) - ee.values(0) < 1e-6 * std::max(1.0, std::abs(ee.values(0))); ++k)
      start.head(ne) += (1.0 + 0.37 * k) * ee.vectors.col(k);
  }
  return lanczos_ground_state([&](const auto& x, Vector& y) { H.apply(Vector(x), y); }, H.dim(), start, opt);
}

/// Reduced density matrix of one mode: trace over electrons and all other modes.
inline Matrix exact_photon_rdm(const Vector& psi, const ProductLayout& layout, int mode) {
  if (mode < 0 || mode >= layout.n_modes) throw ValidationError("mode index out of range");
  if (psi.size() != layout.dim()) throw ValidationError("state vector does not match the product layout");
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-10) throw ValidationError("state vector is not normalized");
  const int nd = layout.n_max + 1;
  const long long ne = layout.n_electron_states;
  const long long st = layout.stride(mode) * ne;  // stride of this mode's digit in psi
  const long long block = st * nd;
  Matrix rho = Matrix::Zero(nd, nd);
  for (long long hi = 0; hi < psi.size(); hi += block)
    for (long long lo = 0; lo < st; ++lo)
      for (int n = 0; n < nd; ++n) {
        const double a = psi(hi + n * st + lo);
        if (a == 0.0) continue;
        for (int m = 0; m < nd; ++m) rho(n, m) += a * psi(hi + m * st + lo);
      }
  rho = (0.5 * (rho + rho.transpose())).eval();
  if (std::abs(rho.trace() - 1.0) > 1e-12) throw Error("photon RDM trace deviates from 1");
  return rho;
}

inline double exact_entropy(const Vector& psi, const ProductLayout& layout, int mode) {
  return von_neumann_entropy(exact_photon_rdm(psi, layout, mode), 1e-12);
}

struct EDOptions {
  int n_max = 10;
  int recheck_increment = 4;  ///< 0 disables the truncation re-check
  double recheck_tol = 1e-8;
  long long max_dim = 2'000'000;
  LanczosOptions lanczos;
};

struct EDResult {
  double energy = 0.0;
  double energy_recheck = 0.0;  ///< at n_max + increment (equal to energy when disabled)
  bool truncation_converged = true;
  int n_max = 0;
  std::vector<double> entropy;  ///< per mode
  double mean_entropy = 0.0;
  double residual = 0.0;
};

/// Ground-state energy and per-mode photon entropies, with the n_max re-check reported (and a
/// warning when the two truncations disagree).
inline EDResult solve_exact(const ElectronBosonSystem& sys, const EDOptions& opt = {}) {
  EDResult out;
  out.n_max = opt.n_max;
  const FockSpaceOperator H(sys, opt.n_max, opt.max_dim);
  const GroundState gs = ground_state(H, opt.lanczos);
  out.energy = gs.energy;
  out.residual = gs.residual;
  out.energy_recheck = gs.energy;
  std::vector<double> s_check;
  if (opt.recheck_increment > 0) {
    const FockSpaceOperator H2(sys, opt.n_max + opt.recheck_increment, opt.max_dim);
    const GroundState gs2 = ground_state(H2, opt.lanczos, embed_state(gs.psi, H.layout(), H2.layout()));
    out.energy_recheck = gs2.energy;
    for (int a = 0; a < sys.n_modes(); ++a) s_check.push_back(exact_entropy(gs2.psi, H2.layout(), a));
  }
  for (int a = 0; a < sys.n_modes(); ++a) out.entropy.push_back(exact_entropy(gs.psi, H.layout(), a));
  bool ok = std::abs(out.energy - out.energy_recheck) <= opt.recheck_tol;
  for (std::size_t a = 0; a < s_check.size(); ++a) ok = ok && std::abs(s_check[a] - out.entropy[a]) <= 1e-6;
  out.truncation_converged = ok;
  if (!ok)
    warn("ED boson truncation n_max=" + std::to_string(opt.n_max) + " not converged (energy change " +
         std::to_string(out.energy_recheck - out.energy) + ")");
  for (double s : out.entropy) out.mean_entropy += s;
  if (!out.entropy.empty()) out.mean_entropy /= out.entropy.size();
  return out;
}

}  // namespace vsq
