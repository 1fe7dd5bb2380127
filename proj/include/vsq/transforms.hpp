#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsq/boson_algebra.hpp"
#include "vsq/determinants.hpp"
#include "vsq/error.hpp"
#include "vsq/hooks.hpp"
#include "vsq/linalg.hpp"
#include "vsq/model.hpp"

namespace vsq {

enum class AnsatzKind { HF_bare, CS, VT, SQ, SCS, CSS, SGS, GSS };

inline const char* ansatz_name(AnsatzKind k) {
  switch (k) {
    case AnsatzKind::HF_bare: return "HF";
    case AnsatzKind::CS: return "CS";
    case AnsatzKind::VT: return "VT";
    case AnsatzKind::SQ: return "SQ";
    case AnsatzKind::SCS: return "SCS";
    case AnsatzKind::CSS: return "CSS";
    case AnsatzKind::SGS: return "SGS";
    case AnsatzKind::GSS: return "GSS";
  }
  return "?";
}

inline AnsatzKind parse_ansatz(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), ::toupper);
  static const std::map<std::string, AnsatzKind> names = {
      {"HF", AnsatzKind::HF_bare}, {"HF_BARE", AnsatzKind::HF_bare}, {"QEDHF", AnsatzKind::HF_bare},
      {"CS", AnsatzKind::CS},      {"VT", AnsatzKind::VT},           {"SQ", AnsatzKind::SQ},
      {"SCS", AnsatzKind::SCS},    {"CSS", AnsatzKind::CSS},         {"SGS", AnsatzKind::SGS},
      {"GSS", AnsatzKind::GSS},    {"VSQ", AnsatzKind::GSS}};
  auto it = names.find(s);
  if (it == names.end()) throw ValidationError("unknown ansatz '" + s + "'");
  return it->second;
}

inline bool has_f(AnsatzKind k) { return k == AnsatzKind::VT || k == AnsatzKind::SGS || k == AnsatzKind::GSS; }
inline bool has_r(AnsatzKind k) {
  return k == AnsatzKind::SQ || k == AnsatzKind::SCS || k == AnsatzKind::CSS || k == AnsatzKind::SGS ||
         k == AnsatzKind::GSS;
}
inline bool has_z(AnsatzKind k) { return k == AnsatzKind::CS || k == AnsatzKind::SCS || k == AnsatzKind::CSS; }
inline bool has_eta(AnsatzKind k) { return has_f(k); }

/// Per-mode f, r, z and per-mode dipole-basis eta. Vectors of parameters the ansatz does not
/// carry stay empty.
struct VariationalParams {
  std::vector<double> f, r, z;
  std::vector<Vector> eta;
};

/// Electronic integrals rotated into the common eigenbasis of the coupling matrices, together
/// with per-mode eigenvalues g_{a,p} and the eta groups tied by degenerate g.
struct DipoleFrame {
  int n_orbitals = 0;
  int n_electrons = 0;
  Matrix rotation;
  Matrix h;
  Tensor4 eri;
  double e_core = 0.0;
  std::vector<double> omega;
  std::vector<Vector> g;
  std::vector<std::vector<int>> eta_group;  ///< group label of each orbital, per mode
  bool include_dse = true;
  bool include_zero_point = true;

  int n_modes() const noexcept { return static_cast<int>(omega.size()); }

  static DipoleFrame from(const ElectronBosonSystem& sys) {
    sys.validate();
    DipoleFrame fr;
    const auto basis = common_dipole_basis(sys);
    fr.n_orbitals = sys.n_orbitals;
    fr.n_electrons = sys.n_electrons;
    fr.rotation = basis.rotation;
    fr.h = basis.rotation.transpose() * sys.h * basis.rotation;
    fr.h = (0.5 * (fr.h + fr.h.transpose())).eval();
    fr.eri = sys.eri.rotated(basis.rotation);
    fr.e_core = sys.e_core;
    fr.include_dse = sys.include_dse;
    fr.include_zero_point = sys.include_zero_point;
    for (int a = 0; a < sys.n_modes(); ++a) {
      fr.omega.push_back(sys.modes[a].omega);
      const Vector& ga = basis.eigenvalues[a];
      fr.g.push_back(ga);
      const double scale = std::max(1.0, ga.cwiseAbs().maxCoeff());
      std::vector<int> label(sys.n_orbitals, -1);
      int next = 0;
      for (int p = 0; p < sys.n_orbitals; ++p) {
        if (label[p] >= 0) continue;
        label[p] = next;
        for (int q = p + 1; q < sys.n_orbitals; ++q)
          if (label[q] < 0 && std::abs(ga(q) - ga(p)) < 1e-8 * scale) label[q] = next;
        ++next;
      }
      fr.eta_group.push_back(std::move(label));
    }
    return fr;
  }
};

inline void validate_params(const DipoleFrame& fr, AnsatzKind k, const VariationalParams& p, double cap = kDefaultSqueezeCap) {
  const std::size_t m = fr.n_modes();
  auto check = [&](const std::vector<double>& v, bool present, const char* name) {
    if (present && v.size() != m)
      throw ValidationError(std::string(ansatz_name(k)) + " needs one " + name + " per mode");
    if (!present && !v.empty())
      throw ValidationError(std::string(ansatz_name(k)) + " carries no " + name + " parameter");
    for (double x : v)
      if (!std::isfinite(x)) throw ValidationError(std::string("non-finite ") + name);
  };
  check(p.f, has_f(k), "f");
  check(p.r, has_r(k), "r");
  check(p.z, has_z(k), "z");
  for (double r : p.r)
    if (std::abs(r) > cap) throw ValidationError("|r| exceeds the squeeze cap");
  if (has_eta(k)) {
    if (p.eta.size() != m) throw ValidationError("eta must be given per mode");
    for (const auto& e : p.eta)
      if (e.size() != fr.n_orbitals || !e.allFinite()) throw ValidationError("eta has the wrong length");
  } else if (!p.eta.empty()) {
    throw ValidationError(std::string(ansatz_name(k)) + " carries no eta parameters");
  }
}

/// Mode-wise scalars of a dressed Hamiltonian that depend on (f, r, z). With d = g.n and
/// eta_hat = eta.n (number operators in the dipole basis) the electron-only residual of
/// the mode is
///   Q = A d^2 + B d eta_hat + C eta_hat^2 + P d + K,
/// the vacuum photon energy is `photon_const`, and kappa_p = kappa_scale * eta_p is the
/// displacement carried by the dressed operator X_p.
struct CoefficientSet {
  double kappa_scale = 0.0;
  double A = 0.0, B = 0.0, C = 0.0, P = 0.0, K = 0.0;
  double photon_const = 0.0;
};

struct ModeDressing {
  double omega = 1.0;
  Vector g;
  Vector eta;
  CoefficientSet c;
  CoefficientSet d_f, d_r, d_z;  ///< partial derivatives of every coefficient
  double photon_number = 0.0;    ///< multiplies b^dag b
  double photon_pair = 0.0;      ///< multiplies b^2 + b^dag^2
  /// Residual bilinear term (l_d d + l_eta eta_hat + l_0)(b + b^dag).
  double bilinear_d = 0.0, bilinear_eta = 0.0, bilinear_const = 0.0;

  Vector kappa() const { return c.kappa_scale * eta; }
  /// Coefficient of the residual dipole self-energy (Delta lambda)^2/2 when eta = g.
  double residual_dse() const { return c.A + c.B + c.C; }
};

/// Dressed Hamiltonian of one ansatz as a coefficient set over the dipole frame. The
/// electronic integrals are kept bare; `dressed_h` and `dressed_eri` fold in the
/// Franck-Condon factors.
struct DressedHamiltonian {
  AnsatzKind ansatz = AnsatzKind::HF_bare;
  const DipoleFrame* frame = nullptr;
  std::vector<ModeDressing> modes;

  int n_orbitals() const { return frame->n_orbitals; }

  /// G_pq = prod_a exp(-(kappa_ap - kappa_aq)^2 / 2).
  Matrix one_body_fc() const {
    const int n = n_orbitals();
    Matrix G = Matrix::Ones(n, n);
    for (const auto& m : modes) {
      const Vector k = m.kappa();
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) G(p, q) *= std::exp(-0.5 * (k(p) - k(q)) * (k(p) - k(q)));
    }
    return G;
  }

  /// G_pqrs with xi = kappa_p - kappa_q + kappa_r - kappa_s (chemist labels).
  double two_body_fc(int p, int q, int r, int s) const {
    double x = 0.0;
    for (const auto& m : modes) {
      const double xi = m.c.kappa_scale * (m.eta(p) - m.eta(q) + m.eta(r) - m.eta(s));
      x += xi * xi;
    }
    return std::exp(-0.5 * x);
  }

  Matrix dressed_h() const { return frame->h.cwiseProduct(one_body_fc()); }

  Tensor4 dressed_eri() const {
    const int n = n_orbitals();
    Tensor4 out(n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) out(p, q, r, s) = frame->eri(p, q, r, s) * two_body_fc(p, q, r, s);
    return out;
  }

  double scalar_constant() const {
    double k = frame->e_core;
    for (const auto& m : modes) k += m.c.K + m.c.photon_const;
    return k;
  }
};

namespace detail {

inline ModeDressing mode_dressing(AnsatzKind kind, double omega, const Vector& g, const Vector& eta, double f,
                                  double r, double z, bool dse, bool zero_point) {
  ModeDressing m;
  m.omega = omega;
  m.g = g;
  m.eta = eta;
  const double s = 1.0 / std::sqrt(2.0 * omega);
  const double rt2w = std::sqrt(2.0 * omega);
  const double rtw2 = std::sqrt(0.5 * omega);
  const double er = std::exp(r), em = std::exp(-r);
  const double ch = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);

  auto& c = m.c;
  c.A = dse ? 0.5 : 0.0;
  c.photon_const = 0.5 * omega * ch - (zero_point ? 0.0 : 0.5 * omega);
  m.d_r.photon_const = omega * sh;
  m.photon_number = omega * ch;
  m.photon_pair = -0.5 * omega * sh * fault_injection().pair_coefficient_scale;
  m.bilinear_d = rtw2 * (has_r(kind) ? em : 1.0);

  switch (kind) {
    case AnsatzKind::HF_bare:
    case AnsatzKind::SQ:
      break;
    case AnsatzKind::CS:
      c.P = -rt2w * z;
      c.K = omega * z * z;
      m.d_z.P = -rt2w;
      m.d_z.K = 2.0 * omega * z;
      m.bilinear_const = -omega * z;
      break;
    case AnsatzKind::SCS:
      c.P = -rt2w * em * z;
      c.K = omega * z * z * em * em;
      m.d_z.P = -rt2w * em;
      m.d_z.K = 2.0 * omega * z * em * em;
      m.d_r.P = rt2w * em * z;
      m.d_r.K = -2.0 * omega * z * z * em * em;
      m.bilinear_const = -omega * z * em * em;
      break;
    case AnsatzKind::CSS:
      c.P = -rt2w * z;
      c.K = omega * z * z;
      m.d_z.P = -rt2w;
      m.d_z.K = 2.0 * omega * z;
      m.bilinear_const = -omega * z * em;
      break;
    case AnsatzKind::VT:
      c.kappa_scale = f * s;
      c.B = -f;
      c.C = 0.5 * f * f;
      m.d_f.kappa_scale = s;
      m.d_f.B = -1.0;
      m.d_f.C = f;
      m.bilinear_eta = -rtw2 * f;
      break;
    case AnsatzKind::GSS:
      c.kappa_scale = f * s * er;
      c.B = -f;
      c.C = 0.5 * f * f;
      m.d_f.kappa_scale = s * er;
      m.d_r.kappa_scale = f * s * er;
      m.d_f.B = -1.0;
      m.d_f.C = f;
      m.bilinear_eta = -rtw2 * f * em;
      break;
    case AnsatzKind::SGS:
      c.kappa_scale = f * s;
      c.B = -f * em;
      c.C = 0.5 * f * f * em * em;
      m.d_f.kappa_scale = s;
      m.d_f.B = -em;
      m.d_f.C = f * em * em;
      m.d_r.B = f * em;
      m.d_r.C = -f * f * em * em;
      m.bilinear_eta = -rtw2 * f * em * em;
      break;
  }
  return m;
}

}  // namespace detail

/// Dressed Hamiltonian U^dag H U for the transformation unitary of `kind`:
///   CS  D(-z)        VT  D(-f_hat)       SQ  S(r)
///   SCS S(r) D(-z)   CSS D(-z) S(r)      SGS S(r) D(-f_hat)    GSS D(-f_hat) S(r)
/// with D(x) = exp(x b^dag - x b), S(r) = exp(r/2 (b^2 - b^dag^2)) and
/// f_hat = f eta_hat / sqrt(2 omega).
inline DressedHamiltonian dress(const DipoleFrame& fr, AnsatzKind kind, const VariationalParams& p,
                                double cap = kDefaultSqueezeCap) {
  validate_params(fr, kind, p, cap);
  DressedHamiltonian out;
  out.ansatz = kind;
  out.frame = &fr;
  for (int a = 0; a < fr.n_modes(); ++a) {
    const double f = has_f(kind) ? p.f[a] : 0.0;
    const double r = has_r(kind) ? p.r[a] : 0.0;
    const double z = has_z(kind) ? p.z[a] : 0.0;
    const Vector eta = has_eta(kind) ? p.eta[a] : fr.g[a];
    out.modes.push_back(
        detail::mode_dressing(kind, fr.omega[a], fr.g[a], eta, f, r, z, fr.include_dse, fr.include_zero_point));
  }
  return out;
}

/// Parameters with every mode set to the same scalars and eta = g.
inline VariationalParams uniform_params(const DipoleFrame& fr, AnsatzKind kind, double f, double r, double z) {
  VariationalParams p;
  const int m = fr.n_modes();
  if (has_f(kind)) p.f.assign(m, f);
  if (has_r(kind)) p.r.assign(m, r);
  if (has_z(kind)) p.z.assign(m, z);
  if (has_eta(kind)) p.eta = fr.g;
  return p;
}

inline void warn_f_range(double f) {
  if (f < 0.0 || f > 1.0) warn("displacement fraction f = " + std::to_string(f) + " lies outside [0, 1]");
}

/// CS dressing with z_a = <lambda_a . D>/sqrt(2 omega_a); the bilinear and DSE terms then carry
/// the fluctuation d - <d>.
inline DressedHamiltonian dress_coherent(const DipoleFrame& fr, const std::vector<double>& mean_coupling) {
  if (mean_coupling.size() != static_cast<std::size_t>(fr.n_modes()))
    throw ValidationError("one mean coupling per mode required");
  VariationalParams p;
  for (int a = 0; a < fr.n_modes(); ++a) {
    if (!std::isfinite(mean_coupling[a])) throw ValidationError("mean dipole must be finite");
    p.z.push_back(mean_coupling[a] / std::sqrt(2.0 * fr.omega[a]));
  }
  return dress(fr, AnsatzKind::CS, p);
}

inline DressedHamiltonian dress_vt(const DipoleFrame& fr, double f) {
  warn_f_range(f);
  return dress(fr, AnsatzKind::VT, uniform_params(fr, AnsatzKind::VT, f, 0.0, 0.0));
}

inline DressedHamiltonian dress_squeeze(const DipoleFrame& fr, double r, double cap = kDefaultSqueezeCap) {
  return dress(fr, AnsatzKind::SQ, uniform_params(fr, AnsatzKind::SQ, 0.0, r, 0.0), cap);
}

inline DressedHamiltonian dress_gss(const DipoleFrame& fr, double f, double r, double cap = kDefaultSqueezeCap) {
  warn_f_range(f);
  return dress(fr, AnsatzKind::GSS, uniform_params(fr, AnsatzKind::GSS, f, r, 0.0), cap);
}

inline DressedHamiltonian dress_sgs(const DipoleFrame& fr, double f, double r, double cap = kDefaultSqueezeCap) {
  warn_f_range(f);
  return dress(fr, AnsatzKind::SGS, uniform_params(fr, AnsatzKind::SGS, f, r, 0.0), cap);
}

inline DressedHamiltonian dress_scs(const DipoleFrame& fr, double z, double r, double cap = kDefaultSqueezeCap) {
  return dress(fr, AnsatzKind::SCS, uniform_params(fr, AnsatzKind::SCS, 0.0, r, z), cap);
}

inline DressedHamiltonian dress_css(const DipoleFrame& fr, double z, double r, double cap = kDefaultSqueezeCap) {
  return dress(fr, AnsatzKind::CSS, uniform_params(fr, AnsatzKind::CSS, 0.0, r, z), cap);
}

// ---------------------------------------------------------------------------------------------
// Matrix assembly (verification path only).

/// Product basis (determinants in the dipole frame) x (Fock states of every mode). The electron
/// index runs fastest; mode 0 is the fastest boson digit.
struct ProductBasis {
  DeterminantSpace electrons;
  int n_max = 10;
  int n_modes = 0;

  ProductBasis(const DipoleFrame& fr, int nmax)
      : electrons(fr.n_orbitals, (fr.n_electrons + 1) / 2, fr.n_electrons / 2), n_max(nmax), n_modes(fr.n_modes()) {
    if (n_max < 1) throw ValidationError("n_max must be >= 1");
  }

  int n_boson_states() const {
    int d = 1;
    for (int a = 0; a < n_modes; ++a) d *= n_max + 1;
    return d;
  }
  int size() const { return electrons.size() * n_boson_states(); }
};

namespace detail {

/// Kronecker product over modes of single-mode matrices (mode 0 fastest).
inline Matrix mode_kron(const std::vector<Matrix>& per_mode) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& m : per_mode) {
    Matrix next(out.rows() * m.rows(), out.cols() * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        next.block(i * out.rows(), j * out.cols(), out.rows(), out.cols()) = m(i, j) * out;
    out = std::move(next);
  }
  return out;
}

/// Single-mode operator embedded on mode a of the boson product space.
inline Matrix on_mode(const Matrix& op, int a, int n_modes) {
  std::vector<Matrix> f(n_modes, Matrix::Identity(op.rows(), op.cols()));
  f[a] = op;
  return mode_kron(f);
}

/// Place E (electron operator) x B (boson operator) into a product-basis matrix.
inline void add_product(Matrix& H, const Matrix& E, const Matrix& B) {
  const Eigen::Index ne = E.rows();
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j)
      if (B(i, j) != 0.0) H.block(i * ne, j * ne, ne, ne) += B(i, j) * E;
}

}  // namespace detail

/// Dense matrix of the dressed operator on `basis`. Electronic terms carry the full boson
/// operators D(kappa_p - kappa_q (+ kappa_r - kappa_s)) rather than their vacuum averages,
/// so the result is the exact U^dag H U restricted to the truncated space.
inline Matrix assemble_dressed_operator(const DressedHamiltonian& dh, const ProductBasis& basis) {
  const DipoleFrame& fr = *dh.frame;
  const int ne = basis.electrons.size();
  const int nb = basis.n_boson_states();
  const int dim = ne * nb;
  const int nm = basis.n_modes;
  const TruncatedFockBasis fock{basis.n_max};
  Matrix H = Matrix::Zero(dim, dim);

  // Electronic part, grouped by boson factor.
  std::map<std::vector<long long>, std::pair<std::vector<double>, Matrix>> groups;
  for_each_electron_term(basis.electrons, fr.h, fr.eri, [&](const ElectronTerm& t) {
    std::vector<double> shift(nm);
    std::vector<long long> key(nm);
    for (int a = 0; a < nm; ++a) {
      const Vector k = dh.modes[a].kappa();
      const auto& o = t.orbitals;
      shift[a] = t.two_body ? k(o[0]) - k(o[1]) + k(o[2]) - k(o[3]) : k(o[0]) - k(o[1]);
      key[a] = std::llround(shift[a] * 1e12);
    }
    auto it = groups.find(key);
    if (it == groups.end()) it = groups.emplace(key, std::make_pair(shift, Matrix::Zero(ne, ne))).first;
    it->second.second(t.bra, t.ket) += t.value;
  });
  for (const auto& [key, entry] : groups) {
    std::vector<Matrix> factors;
    for (int a = 0; a < nm; ++a) factors.push_back(displacement_matrix(entry.first[a], fock));
    detail::add_product(H, entry.second, detail::mode_kron(factors));
  }

  const Matrix I_e = Matrix::Identity(ne, ne);
  const Matrix I_b = Matrix::Identity(nb, nb);
  detail::add_product(H, fr.e_core * I_e, I_b);

  const Matrix b = annihilation(fock.dim());
  const Matrix x = b + b.transpose();
  const Matrix pair = b * b + (b * b).transpose();
  const Matrix num = number_operator(fock.dim());
  for (int a = 0; a < nm; ++a) {
    const auto& m = dh.modes[a];
    const Matrix d = one_body_operator(basis.electrons, m.g.asDiagonal().toDenseMatrix());
    const Matrix e = one_body_operator(basis.electrons, m.eta.asDiagonal().toDenseMatrix());
    const Matrix Q = m.c.A * d * d + m.c.B * d * e + m.c.C * e * e + m.c.P * d + m.c.K * I_e;
    detail::add_product(H, Q, I_b);
    const Matrix L = m.bilinear_d * d + m.bilinear_eta * e + m.bilinear_const * I_e;
    detail::add_product(H, L, detail::on_mode(x, a, nm));
    const Matrix photon = m.photon_number * num + m.photon_pair * pair + m.c.photon_const * Matrix::Identity(fock.dim(), fock.dim());
    detail::add_product(H, I_e, detail::on_mode(photon, a, nm));
  }
  return H;
}

/// The transformation unitary of `kind` on `basis`: block diagonal over dipole-frame
/// determinants, since f_hat is diagonal there.
inline Matrix transformation_unitary(const DipoleFrame& fr, AnsatzKind kind, const VariationalParams& p,
                                     const ProductBasis& basis) {
  validate_params(fr, kind, p);
  const int ne = basis.electrons.size();
  const int nb = basis.n_boson_states();
  const TruncatedFockBasis fock{basis.n_max};
  Matrix U = Matrix::Zero(ne * nb, ne * nb);
  for (int I = 0; I < ne; ++I) {
    std::vector<Matrix> factors;
    for (int a = 0; a < fr.n_modes(); ++a) {
      const double r = has_r(kind) ? p.r[a] : 0.0;
      double shift = has_z(kind) ? p.z[a] : 0.0;
      if (has_f(kind)) {
        double e = 0.0;
        for (int q = 0; q < fr.n_orbitals; ++q) e += basis.electrons.occupation(I, q) * p.eta[a](q);
        shift = p.f[a] * e / std::sqrt(2.0 * fr.omega[a]);
      }
      const Matrix D = displacement_matrix(-shift, fock);
      const Matrix S = squeeze_matrix(r, fock);
      switch (kind) {
        case AnsatzKind::SCS:
        case AnsatzKind::SGS: factors.push_back(S * D); break;
        default: factors.push_back(D * S); break;
      }
    }
    const Matrix B = detail::mode_kron(factors);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) U(i * ne + I, j * ne + I) = B(i, j);
  }
  return U;
}

/// U^dag H U.
inline Matrix numeric_similarity_transform(const Matrix& H, const Matrix& U) {
  if (H.rows() != H.cols() || U.rows() != U.cols() || H.rows() != U.rows())
    throw ValidationError("similarity transform: dimension mismatch");
  return U.transpose() * H * U;
}

/// Indices of product states whose boson occupations are all <= cutoff.
inline std::vector<int> low_boson_block(const ProductBasis& basis, int cutoff) {
  std::vector<int> idx;
  const int ne = basis.electrons.size();
  for (int k = 0; k < basis.n_boson_states(); ++k) {
    int rest = k;
    bool keep = true;
    for (int a = 0; a < basis.n_modes; ++a) {
      if (rest % (basis.n_max + 1) > cutoff) keep = false;
      rest /= basis.n_max + 1;
    }
    if (keep)
      for (int e = 0; e < ne; ++e) idx.push_back(k * ne + e);
  }
  return idx;
}

}  // namespace vsq
