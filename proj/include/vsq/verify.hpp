#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vsq/boson_algebra.hpp"
#include "vsq/entanglement.hpp"
#include "vsq/fixtures.hpp"
#include "vsq/scf.hpp"
#include "vsq/transforms.hpp"

namespace vsq {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   ///< worst deviation found
  double tolerance = 0.0;
  std::string detail;
};

inline CheckResult make_check(std::string name, double measured, double tol, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tol;
  c.pass = std::isfinite(measured) && measured <= tol;
  c.detail = std::move(detail);
  return c;
}

inline constexpr AnsatzKind kDressedKinds[] = {AnsatzKind::CS,  AnsatzKind::VT,  AnsatzKind::SQ, AnsatzKind::SCS,
                                               AnsatzKind::CSS, AnsatzKind::SGS, AnsatzKind::GSS};

/// Sampling box for random variational parameters; eta is sampled as g + U(-eta_spread, eta_spread).
struct ParamBox {
  double f_min = 0.0, f_max = 1.0;
  double r_max = 0.4;
  double z_max = 0.8;
  double eta_spread = 0.2;
};

/// The box used where a truncated Fock space is involved: it keeps the lowest states of every
/// dressed frame well inside n_max = 30.
inline constexpr ParamBox kTruncationBox{0.0, 1.0, 0.25, 0.5, 0.1};

inline VariationalParams random_params(const DipoleFrame& fr, AnsatzKind kind, std::mt19937_64& rng,
                                       const ParamBox& box = {}) {
  std::uniform_real_distribution<double> uf(box.f_min, box.f_max), ur(-box.r_max, box.r_max),
      uz(-box.z_max, box.z_max), ue(-box.eta_spread, box.eta_spread);
  VariationalParams p;
  for (int a = 0; a < fr.n_modes(); ++a) {
    if (has_f(kind)) p.f.push_back(uf(rng));
    if (has_r(kind)) p.r.push_back(ur(rng));
    if (has_z(kind)) p.z.push_back(uz(rng));
    if (has_eta(kind)) {
      Vector e = fr.g[a];
      for (int q = 0; q < fr.n_orbitals; ++q) e(q) += ue(rng);
      p.eta.push_back(e);
    }
  }
  return p;
}

/// Per-spin idempotent density of a random orthonormal set of occupied orbitals.
inline Matrix random_density(int n, int n_occ, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = nd(rng);
  const Matrix Q = M.householderQr().householderQ();
  const Matrix C = Q.leftCols(n_occ);
  return C * C.transpose();
}

// ---------------------------------------------------------------------------------------------
// Operator algebra.

inline std::vector<CheckResult> check_operator_algebra() {
  std::vector<CheckResult> out;
  const int n_max = 40;
  const int half = (n_max + 1) / 2;
  // Products are formed from exponentials of the generator truncated to d states; their low
  // block converges as d grows.
  auto block = [&](auto make) { return converged_operator_block(make, half); };

  const Matrix act = block([&](int d) {
    const Matrix b = annihilation(d);
    const Matrix D = raw_displacement(1.3, d);
    return Matrix(D.transpose() * b * D - b - 1.3 * Matrix::Identity(d, d));
  });
  out.push_back(make_check("displacement action D^dag b D = b + z", max_abs(act), 1e-8));

  const double r = 0.4;
  const Matrix bog = block([&](int d) {
    const Matrix b = annihilation(d);
    const Matrix S = raw_squeeze(r, d);
    return Matrix(S.transpose() * b * S - std::cosh(r) * b + std::sinh(r) * b.transpose());
  });
  out.push_back(make_check("squeeze action S^dag b S = cosh r b - sinh r b^dag", max_abs(bog), 1e-8));

  double unit = 0.0;
  for (double z : {-2.0, -0.7, 0.5, 2.0})
    unit = std::max(unit, max_abs(block([&](int d) {
      const Matrix D = raw_displacement(z, d);
      return Matrix(D.transpose() * D - Matrix::Identity(d, d));
    })));
  for (double rr : {-1.0, -0.3, 0.6, 1.0})
    unit = std::max(unit, max_abs(block([&](int d) {
      const Matrix S = raw_squeeze(rr, d);
      return Matrix(S.transpose() * S - Matrix::Identity(d, d));
    })));
  out.push_back(make_check("unitarity of D and S on the converged block", unit, 1e-8));

  double rot = 0.0;
  for (auto [z, rr] : {std::pair{0.8, 0.3}, {-1.2, -0.5}, {1.5, 0.7}})
    rot = std::max(rot, max_abs(block([&](int d) {
      return Matrix(raw_squeeze(rr, d) * raw_displacement(z, d) -
                    raw_displacement(std::exp(-rr) * z, d) * raw_squeeze(rr, d));
    })));
  out.push_back(make_check("rotation S(r) D(z) = D(e^-r z) S(r)", rot, 1e-8));

  double ov = 0.0;
  for (auto [z1, z2, rr] : {std::tuple{0.0, 1.0, 0.3}, {0.4, -0.9, -0.4}, {1.0, 1.7, 0.8}}) {
    for (Ordering o : {Ordering::DS, Ordering::SD}) {
      const SqueezedCoherentState a{z1, rr, o}, c{z2, rr, o};
      ov = std::max(ov, std::abs(overlap_squeezed_coherent(a, c) - overlap_closed_form(a, c)));
    }
  }
  out.push_back(make_check("squeezed coherent overlaps, Fock route vs closed form", ov, 1e-8));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Dressed Hamiltonians.

/// Lowest floor(n_max/3) eigenvalues of every assembled dressed Hamiltonian against the bare one.
inline CheckResult check_spectrum_invariance(const ElectronBosonSystem& sys, const std::string& label, int n_max = 30,
                                             int points = 5, unsigned seed = 7) {
  const DipoleFrame fr = DipoleFrame::from(sys);
  const ProductBasis basis(fr, n_max);
  const int k = n_max / 3;
  const Vector bare =
      symmetric_eigen(assemble_dressed_operator(dress(fr, AnsatzKind::HF_bare, {}), basis)).values.head(k);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::string where;
  for (AnsatzKind kind : kDressedKinds)
    for (int i = 0; i < points; ++i) {
      const auto p = random_params(fr, kind, rng, kTruncationBox);
      const Matrix H = assemble_dressed_operator(dress(fr, kind, p), basis);
      const double dev = (symmetric_eigen(H).values.head(k) - bare).cwiseAbs().maxCoeff();
      if (!(dev <= worst)) {
        worst = dev;
        where = ansatz_name(kind);
      }
    }
  return make_check("spectrum invariance (" + label + ")", worst, 1e-7, "worst ansatz " + where);
}

namespace detail {

inline Matrix restrict_to(const Matrix& M, const std::vector<int>& idx) {
  Matrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = M(idx[i], idx[j]);
  return out;
}

}  // namespace detail

/// Largest element-wise gap between the assembled dressed operator and the numeric U^dag H U on
/// the block with every boson occupation <= n_max/3. The numeric product is formed in a padded
/// boson space that grows until the block is stable.
inline double similarity_transform_gap(const DipoleFrame& fr, AnsatzKind kind, const VariationalParams& p,
                                       int n_max = 30) {
  const int cutoff = n_max / 3;
  const ProductBasis basis(fr, n_max);
  auto numeric = [&](int nm) {
    const ProductBasis wide(fr, nm);
    const Matrix H = assemble_dressed_operator(dress(fr, AnsatzKind::HF_bare, {}), wide);
    return detail::restrict_to(numeric_similarity_transform(H, transformation_unitary(fr, kind, p, wide)),
                               low_boson_block(wide, cutoff));
  };
  const Matrix A = detail::restrict_to(assemble_dressed_operator(dress(fr, kind, p), basis),
                                       low_boson_block(basis, cutoff));
  int nm = n_max;
  Matrix N = numeric(nm);
  while (true) {
    if (nm > 120) throw TruncationError("similarity transform: padded product did not converge");
    Matrix next = numeric(nm + 10);
    const bool done = max_abs(next - N) < 1e-11;
    N = std::move(next);
    nm += 10;
    if (done) break;
  }
  return max_abs(A - N);
}

inline CheckResult check_similarity_transform(const ElectronBosonSystem& sys, const std::string& label,
                                              int n_max = 30, int points = 2, unsigned seed = 11) {
  const DipoleFrame fr = DipoleFrame::from(sys);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::string where;
  for (AnsatzKind kind : kDressedKinds)
    for (int i = 0; i < points; ++i) {
      const double dev = similarity_transform_gap(fr, kind, random_params(fr, kind, rng, kTruncationBox), n_max);
      if (!(dev <= worst)) {
        worst = dev;
        where = ansatz_name(kind);
      }
    }
  return make_check("numeric similarity transform (" + label + ")", worst, 1e-8, "worst ansatz " + where);
}

/// H_SCS(z, r) against the D(e^-r z) S(r) assembly, element-wise.
inline CheckResult check_scs_rotation(const ElectronBosonSystem& sys, const std::string& label, int n_max = 30,
                                      int points = 10, unsigned seed = 13) {
  const DipoleFrame fr = DipoleFrame::from(sys);
  const ProductBasis basis(fr, n_max);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(-1.0, 1.0), ur(-0.5, 0.5);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double z = uz(rng), r = ur(rng);
    const Matrix scs = assemble_dressed_operator(dress_scs(fr, z, r), basis);
    const Matrix css = assemble_dressed_operator(dress_css(fr, std::exp(-r) * z, r), basis);
    worst = std::max(worst, max_abs(scs - css));
  }
  return make_check("SCS(z, r) = D(e^-r z) S(r) assembly (" + label + ")", worst, 1e-9);
}

// ---------------------------------------------------------------------------------------------
// Gradients.

struct GradientReport {
  double r = 0.0, f = 0.0, z = 0.0, eta = 0.0, fock = 0.0;
};

/// Relative deviation with a floor of 1e-2 on the denominator, so vanishing components are
/// held to an absolute 1e-8.
inline double relative_gap(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-2});
}

/// Analytic parameter gradients and Fock matrix against central differences (h = 1e-5) at
/// random (rho, parameters) points; every dressed ansatz is probed at each point.
inline GradientReport gradient_deviation(const ElectronBosonSystem& sys, int points = 20, unsigned seed = 17) {
  const DipoleFrame fr = DipoleFrame::from(sys);
  const int n = fr.n_orbitals;
  const double h = 1e-5;
  std::mt19937_64 rng(seed);
  GradientReport rep;
  for (int pt = 0; pt < points; ++pt) {
    const Matrix rho = random_density(n, fr.n_electrons / 2, rng);
    for (AnsatzKind kind : kDressedKinds) {
      const VariationalParams p = random_params(fr, kind, rng);
      const auto dh = dress(fr, kind, p);
      const ParamGradient g = parameter_gradient(dh, rho);
      auto energy = [&](const VariationalParams& q) { return total_energy(dress(fr, kind, q), rho).total; };
      auto fd = [&](auto&& mutate) {
        VariationalParams a = p, b = p;
        mutate(a, h);
        mutate(b, -h);
        return (energy(a) - energy(b)) / (2.0 * h);
      };
      for (int a = 0; a < fr.n_modes(); ++a) {
        if (has_r(kind)) rep.r = std::max(rep.r, relative_gap(g.r[a], fd([&](auto& q, double d) { q.r[a] += d; })));
        if (has_f(kind)) rep.f = std::max(rep.f, relative_gap(g.f[a], fd([&](auto& q, double d) { q.f[a] += d; })));
        if (has_z(kind)) rep.z = std::max(rep.z, relative_gap(g.z[a], fd([&](auto& q, double d) { q.z[a] += d; })));
        if (has_eta(kind))
          for (int q = 0; q < n; ++q)
            rep.eta = std::max(rep.eta,
                               relative_gap(g.eta[a](q), fd([&](auto& x, double d) { x.eta[a](q) += d; })));
      }
      // F_pq = (1/4) dE/d(eps) along rho -> rho + eps (e_pq + e_qp).
      const Matrix F = fock_matrix(dh, rho);
      for (int x = 0; x < n; ++x)
        for (int y = x; y < n; ++y) {
          Matrix dp = rho, dm = rho;
          dp(x, y) += h;
          dp(y, x) += h;
          dm(x, y) -= h;
          dm(y, x) -= h;
          const double num = 0.25 * (total_energy(dh, dp).total - total_energy(dh, dm).total) / (2.0 * h);
          rep.fock = std::max(rep.fock, relative_gap(F(x, y), num));
        }
    }
  }
  return rep;
}

inline std::vector<CheckResult> check_gradients(const ElectronBosonSystem& sys, const std::string& label,
                                                int points = 20, unsigned seed = 17) {
  const auto rep = gradient_deviation(sys, points, seed);
  return {make_check("dE/dr vs finite differences (" + label + ")", rep.r, 1e-6),
          make_check("dE/df vs finite differences (" + label + ")", rep.f, 1e-6),
          make_check("dE/deta vs finite differences (" + label + ")", rep.eta, 1e-6),
          make_check("dE/dz vs finite differences (" + label + ")", rep.z, 1e-6),
          make_check("Fock matrix vs finite differences (" + label + ")", rep.fock, 1e-6)};
}

// ---------------------------------------------------------------------------------------------
// Entropy routes.

/// Random branch set: 2-6 branches, Dirichlet-like weights, z in [-2, 2], shared r in [-0.5, 0.5].
inline MeanFieldPolaritonState random_branch_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nb(2, 6);
  std::uniform_real_distribution<double> uz(-2.0, 2.0), ur(-0.5, 0.5);
  std::exponential_distribution<double> ew(1.0);
  MeanFieldPolaritonState s;
  s.r = ur(rng);
  const int k = nb(rng);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    s.branches.push_back({ew(rng), uz(rng)});
    total += s.branches.back().weight;
  }
  for (auto& b : s.branches) b.weight /= total;
  std::sort(s.branches.begin(), s.branches.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
  return s;
}

inline CheckResult check_entropy_routes(int sets = 50, unsigned seed = 19) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < sets; ++i) {
    const auto s = random_branch_set(rng);
    worst = std::max(worst, std::abs(fock_route_entropy(s) - gram_route_entropy(s)));
  }
  return make_check("entropy: Fock route vs Gram route on random branch sets", worst, 1e-8);
}

// ---------------------------------------------------------------------------------------------

/// Small single-mode systems used by the verification suite.
inline ElectronBosonSystem verification_lattice() {
  LatticeSpec s = hubbard_holstein_fixture(1.0, 1.0, 1.0, 2);
  s.mode_layout = ModeLayout::SingleCavity;
  return build_hubbard_holstein(s);
}

inline ElectronBosonSystem verification_molecule() { return molecular_fixture("h2_sto3g", 0.3, 0.5); }

/// The full invariant suite behind `verify`.
inline std::vector<CheckResult> run_verification_suite(unsigned seed = 0) {
  std::vector<CheckResult> out = check_operator_algebra();
  const auto lattice = verification_lattice();
  const auto molecule = verification_molecule();
  for (const auto& [sys, label] : {std::pair{lattice, "2-site lattice"}, {molecule, "H2"}}) {
    out.push_back(check_spectrum_invariance(sys, label, 30, 5, seed + 7));
    out.push_back(check_similarity_transform(sys, label, 30, 2, seed + 11));
    out.push_back(check_scs_rotation(sys, label, 30, 10, seed + 13));
  }
  for (const auto& [sys, label] : {std::pair{molecule, "H2"}, {build_hubbard_holstein(hubbard_holstein_fixture()),
                                                               "4-site Hubbard-Holstein"}}) {
    auto g = check_gradients(sys, label, 5, seed + 17);
    out.insert(out.end(), g.begin(), g.end());
  }
  out.push_back(check_entropy_routes(50, seed + 19));
  return out;
}

}  // namespace vsq
