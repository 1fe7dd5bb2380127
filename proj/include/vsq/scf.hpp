#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vsq/error.hpp"
#include "vsq/hooks.hpp"
#include "vsq/linalg.hpp"
#include "vsq/model.hpp"
#include "vsq/transforms.hpp"

namespace vsq {

// ---------------------------------------------------------------------------------------------
// Energy functional. rho is the per-spin density in the dipole frame (Tr rho = N/2).

struct EnergyDecomposition {
  double one_body = 0.0;
  double two_body = 0.0;
  double electronic = 0.0;  ///< one_body + two_body
  double residual = 0.0;    ///< sum over modes of <Q>: residual DSE, polaron and shift terms
  double photon = 0.0;      ///< dressed photon vacuum energy, zero point included when enabled
  double constant = 0.0;    ///< core energy
  double total = 0.0;
};

namespace detail {

/// <n_p n_q> for a closed-shell determinant with per-spin density rho.
inline Matrix pair_occupation(const Matrix& rho) {
  const Vector d = rho.diagonal();
  Matrix N2 = 4.0 * d * d.transpose() - 2.0 * rho.cwiseProduct(rho);
  N2.diagonal() += 2.0 * d;
  return N2;
}

inline void check_density(const DressedHamiltonian& dh, const Matrix& rho) {
  if (rho.rows() != dh.n_orbitals() || rho.cols() != dh.n_orbitals())
    throw ValidationError("density matrix has the wrong shape");
}

struct ModeExpectations {
  double d = 0.0, dd = 0.0, de = 0.0, ee = 0.0;
};

inline ModeExpectations mode_expectations(const ModeDressing& m, const Matrix& rho, const Matrix& N2) {
  ModeExpectations x;
  x.d = 2.0 * m.g.dot(rho.diagonal());
  x.dd = m.g.dot(N2 * m.g);
  x.de = m.g.dot(N2 * m.eta);
  x.ee = m.eta.dot(N2 * m.eta);
  return x;
}

}  // namespace detail

/// E1 + E2 = 2 sum h_pq G_pq rho_pq + sum (pq|rs) G_pqrs (2 rho_pq rho_rs - rho_ps rho_rq).
/// With every G = 1 this is the closed-shell Hartree-Fock energy of (h, I) without the core term.
inline EnergyDecomposition total_energy(const DressedHamiltonian& dh, const Matrix& rho) {
  detail::check_density(dh, rho);
  const DipoleFrame& fr = *dh.frame;
  const int n = fr.n_orbitals;
  EnergyDecomposition e;
  e.one_body = 2.0 * dh.dressed_h().cwiseProduct(rho).sum();
  const Tensor4 It = dh.dressed_eri();
  double e2 = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) e2 += It(p, q, r, s) * (2.0 * rho(p, q) * rho(r, s) - rho(p, s) * rho(r, q));
  e.two_body = e2;
  e.electronic = e.one_body + e.two_body;
  const Matrix N2 = detail::pair_occupation(rho);
  for (const auto& m : dh.modes) {
    const auto x = detail::mode_expectations(m, rho, N2);
    e.residual += m.c.A * x.dd + m.c.B * x.de + m.c.C * x.ee + m.c.P * x.d + m.c.K;
    e.photon += m.c.photon_const;
  }
  e.constant = fr.e_core;
  e.total = e.electronic + e.residual + e.photon + e.constant;
  return e;
}

inline double electronic_energy(const DressedHamiltonian& dh, const Matrix& rho) {
  return total_energy(dh, rho).electronic;
}

/// Fock matrix F with dE/drho = 2F (symmetrized), including the G-weighted one- and two-body
/// terms and the mean-field part of every residual quadratic Q.
inline Matrix fock_matrix(const DressedHamiltonian& dh, const Matrix& rho) {
  detail::check_density(dh, rho);
  const DipoleFrame& fr = *dh.frame;
  const int n = fr.n_orbitals;
  Matrix dE = 2.0 * dh.dressed_h();
  const Tensor4 It = dh.dressed_eri();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          acc += 4.0 * It(a, b, r, s) * rho(r, s);
          acc -= It(a, r, s, b) * rho(s, r);
          acc -= It(r, b, a, s) * rho(r, s);
        }
      dE(a, b) += acc;
    }
  for (const auto& m : dh.modes) {
    const Matrix W = m.c.A * m.g * m.g.transpose() + 0.5 * m.c.B * (m.g * m.eta.transpose() + m.eta * m.g.transpose()) +
                     m.c.C * m.eta * m.eta.transpose();
    const Vector v = m.c.P * m.g;
    const Vector wd = W * rho.diagonal();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) dE(a, b) -= 4.0 * W(a, b) * rho(a, b);
      dE(a, a) += 8.0 * wd(a) + 2.0 * W(a, a) + 2.0 * v(a);
    }
  }
  return 0.25 * (dE + dE.transpose());
}

/// Analytic derivatives of the total energy at fixed rho. Entries of parameters the ansatz
/// lacks stay empty; eta gradients are per orbital (not yet summed over tied groups).
struct ParamGradient {
  std::vector<double> f, r, z;
  std::vector<Vector> eta;
};

namespace detail {

/// dE/dkappa_{a,p} for every mode a.
inline std::vector<Vector> kappa_gradient(const DressedHamiltonian& dh, const Matrix& rho) {
  const DipoleFrame& fr = *dh.frame;
  const int n = fr.n_orbitals;
  const int nm = static_cast<int>(dh.modes.size());
  std::vector<Vector> grad(nm, Vector::Zero(n));
  std::vector<Vector> k(nm);
  for (int a = 0; a < nm; ++a) k[a] = dh.modes[a].kappa();
  const Matrix G = dh.one_body_fc();
  for (int a = 0; a < nm; ++a)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) grad[a](p) -= 4.0 * fr.h(p, q) * rho(p, q) * (k[a](p) - k[a](q)) * G(p, q);
  std::vector<double> xi(nm);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double I = fr.eri(p, q, r, s);
          if (I == 0.0) continue;
          const double T = 2.0 * rho(p, q) * rho(r, s) - rho(p, s) * rho(r, q);
          if (T == 0.0) continue;
          double x2 = 0.0;
          for (int a = 0; a < nm; ++a) {
            xi[a] = k[a](p) - k[a](q) + k[a](r) - k[a](s);
            x2 += xi[a] * xi[a];
          }
          const double w = I * T * std::exp(-0.5 * x2);
          for (int a = 0; a < nm; ++a) {
            const double v = w * xi[a];
            grad[a](p) -= v;
            grad[a](q) += v;
            grad[a](r) -= v;
            grad[a](s) += v;
          }
        }
  return grad;
}

}  // namespace detail

inline ParamGradient parameter_gradient(const DressedHamiltonian& dh, const Matrix& rho) {
  detail::check_density(dh, rho);
  const AnsatzKind kind = dh.ansatz;
  const auto gk = detail::kappa_gradient(dh, rho);
  const Matrix N2 = detail::pair_occupation(rho);
  const double offset = fault_injection().gradient_offset;
  ParamGradient out;
  for (std::size_t a = 0; a < dh.modes.size(); ++a) {
    const auto& m = dh.modes[a];
    const auto x = detail::mode_expectations(m, rho, N2);
    const double dkappa = gk[a].dot(m.eta);
    auto chain = [&](const CoefficientSet& d) {
      return dkappa * d.kappa_scale + x.dd * d.A + x.de * d.B + x.ee * d.C + x.d * d.P + d.K + d.photon_const + offset;
    };
    if (has_f(kind)) out.f.push_back(chain(m.d_f));
    if (has_r(kind)) out.r.push_back(chain(m.d_r));
    if (has_z(kind)) out.z.push_back(chain(m.d_z));
    if (has_eta(kind)) {
      Vector ge = m.c.kappa_scale * gk[a] + m.c.B * (N2 * m.g) + 2.0 * m.c.C * (N2 * m.eta);
      ge.array() += offset;
      out.eta.push_back(ge);
    }
  }
  return out;
}

inline std::vector<double> grad_r(const DressedHamiltonian& dh, const Matrix& rho) {
  if (!has_r(dh.ansatz)) throw ValidationError(std::string(ansatz_name(dh.ansatz)) + " has no squeeze parameter");
  return parameter_gradient(dh, rho).r;
}

inline std::vector<double> grad_f(const DressedHamiltonian& dh, const Matrix& rho) {
  if (!has_f(dh.ansatz)) throw ValidationError(std::string(ansatz_name(dh.ansatz)) + " has no f parameter");
  return parameter_gradient(dh, rho).f;
}

inline std::vector<Vector> grad_eta(const DressedHamiltonian& dh, const Matrix& rho) {
  if (!has_eta(dh.ansatz)) throw ValidationError(std::string(ansatz_name(dh.ansatz)) + " has no eta parameters");
  return parameter_gradient(dh, rho).eta;
}

// ---------------------------------------------------------------------------------------------
// Self-consistent field.

struct SCFOptions {
  double tol_energy = 1e-10;
  double tol_gradient = 1e-7;
  int max_macro = 200;
  int max_roothaan = 200;
  double tol_commutator = 1e-10;
  int diis_size = 8;
  double squeeze_cap = kDefaultSqueezeCap;
  double f_min = -0.2, f_max = 1.2;
  bool freeze_f = false, freeze_r = false, freeze_z = false, freeze_eta = false;
  /// Starting (and, for frozen entries, fixed) parameters; defaults are used when absent.
  std::optional<VariationalParams> initial;
  bool multi_start = true;
  int random_starts = 0;
  unsigned seed = 0;
};

struct TraceEntry {
  int iteration = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  double commutator_norm = 0.0;
};

struct SCFResult {
  AnsatzKind ansatz = AnsatzKind::HF_bare;
  Matrix density;        ///< per-spin density in the input orbital basis
  Matrix coefficients;   ///< occupied and virtual orbitals in the input orbital basis
  Vector orbital_energies;
  Matrix frame_density;  ///< per-spin density in the dipole frame
  VariationalParams params;
  EnergyDecomposition energy;
  std::vector<TraceEntry> trace;
  bool converged = false;
  bool descent_violation = false;
  int macro_iterations = 0;
  double gradient_norm = 0.0;
  double commutator_norm = 0.0;
  std::string start;  ///< label of the multi-start seed that won
};

namespace detail {

struct Roothaan {
  Matrix rho, C;
  Vector eps;
  double energy = 0.0;
  double commutator = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline Matrix aufbau(const Matrix& C, int n_occ) {
  const Matrix Co = C.leftCols(n_occ);
  return Co * Co.transpose();
}

inline double commutator_norm(const Matrix& F, const Matrix& rho) { return max_abs(F * rho - rho * F); }

/// Closed-shell Roothaan iterations with DIIS at fixed dressing; falls back to damped
/// iterations when DIIS stalls.
inline Roothaan roothaan(const DressedHamiltonian& dh, Matrix rho, int n_occ, const SCFOptions& opt) {
  Roothaan out;
  std::deque<Matrix> fs, es;
  double e_prev = std::numeric_limits<double>::infinity();
  const int n = dh.n_orbitals();
  for (int pass = 0; pass < 2 && !out.converged; ++pass) {
    const bool damped = pass == 1;
    fs.clear();
    es.clear();
    for (int it = 0; it < opt.max_roothaan; ++it) {
      const Matrix F = fock_matrix(dh, rho);
      const Matrix err = F * rho - rho * F;
      const double e = total_energy(dh, rho).total;
      const double cn = max_abs(err);
      ++out.iterations;
      if (cn < opt.tol_commutator && std::abs(e - e_prev) < 1e-12) {
        out.converged = true;
        break;
      }
      e_prev = e;
      Matrix Fx = F;
      if (!damped && opt.diis_size > 1) {
        fs.push_back(F);
        es.push_back(err);
        if (static_cast<int>(fs.size()) > opt.diis_size) {
          fs.pop_front();
          es.pop_front();
        }
        const int m = static_cast<int>(fs.size());
        if (m >= 2) {
          Matrix B = Matrix::Zero(m + 1, m + 1);
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) B(i, j) = es[i].cwiseProduct(es[j]).sum();
          B.row(m).head(m).setConstant(-1.0);
          B.col(m).head(m).setConstant(-1.0);
          Vector rhs = Vector::Zero(m + 1);
          rhs(m) = -1.0;
          const Vector c = B.colPivHouseholderQr().solve(rhs);
          if (c.allFinite()) {
            Fx.setZero();
            for (int i = 0; i < m; ++i) Fx += c(i) * fs[i];
          }
        }
      }
      const auto es_ = symmetric_eigen(Fx);
      const Matrix rho_new = aufbau(es_.vectors, n_occ);
      rho = damped ? Matrix(0.5 * rho + 0.5 * rho_new) : rho_new;
      if (damped) {
        // Re-purify the mixed density.
        const auto ep = symmetric_eigen(-rho);
        rho = aufbau(ep.vectors, n_occ);
      }
    }
  }
  const Matrix F = fock_matrix(dh, rho);
  const auto es_ = symmetric_eigen(F);
  out.C = es_.vectors;
  out.eps = es_.values;
  out.rho = rho;
  out.energy = total_energy(dh, rho).total;
  out.commutator = commutator_norm(F, rho);
  if (n_occ > 0 && n_occ < n && es_.values(n_occ) - es_.values(n_occ - 1) < 1e-8)
    warn("degenerate frontier orbitals: closed-shell occupation is ambiguous");
  return out;
}

/// Free variables of the parameter optimization: f, r, z per mode and one eta per tied group.
struct ParamLayout {
  struct Slot {
    char kind;  // 'f', 'r', 'z', 'e'
    int mode;
    std::vector<int> orbitals;  // eta group members
  };
  std::vector<Slot> slots;
  Vector lower, upper;

  ParamLayout(const DipoleFrame& fr, AnsatzKind k, const SCFOptions& opt) {
    std::vector<double> lo, hi;
    const double inf = std::numeric_limits<double>::infinity();
    for (int a = 0; a < fr.n_modes(); ++a) {
      if (has_f(k) && !opt.freeze_f) {
        slots.push_back({'f', a, {}});
        lo.push_back(opt.f_min);
        hi.push_back(opt.f_max);
      }
      if (has_r(k) && !opt.freeze_r) {
        slots.push_back({'r', a, {}});
        lo.push_back(-opt.squeeze_cap);
        hi.push_back(opt.squeeze_cap);
      }
      if (has_z(k) && !opt.freeze_z) {
        slots.push_back({'z', a, {}});
        lo.push_back(-inf);
        hi.push_back(inf);
      }
      if (has_eta(k) && !opt.freeze_eta) {
        const auto& label = fr.eta_group[a];
        const int ng = *std::max_element(label.begin(), label.end()) + 1;
        for (int gidx = 0; gidx < ng; ++gidx) {
          Slot s{'e', a, {}};
          for (int p = 0; p < fr.n_orbitals; ++p)
            if (label[p] == gidx) s.orbitals.push_back(p);
          slots.push_back(s);
          lo.push_back(-inf);
          hi.push_back(inf);
        }
      }
    }
    lower = Eigen::Map<Vector>(lo.data(), lo.size());
    upper = Eigen::Map<Vector>(hi.data(), hi.size());
  }

  int size() const { return static_cast<int>(slots.size()); }

  Vector pack(const VariationalParams& p) const {
    Vector x(size());
    for (int i = 0; i < size(); ++i) {
      const auto& s = slots[i];
      switch (s.kind) {
        case 'f': x(i) = p.f[s.mode]; break;
        case 'r': x(i) = p.r[s.mode]; break;
        case 'z': x(i) = p.z[s.mode]; break;
        default: {
          double acc = 0.0;
          for (int q : s.orbitals) acc += p.eta[s.mode](q);
          x(i) = acc / s.orbitals.size();
        }
      }
    }
    return x;
  }

  VariationalParams unpack(const Vector& x, VariationalParams p) const {
    for (int i = 0; i < size(); ++i) {
      const auto& s = slots[i];
      switch (s.kind) {
        case 'f': p.f[s.mode] = x(i); break;
        case 'r': p.r[s.mode] = x(i); break;
        case 'z': p.z[s.mode] = x(i); break;
        default:
          for (int q : s.orbitals) p.eta[s.mode](q) = x(i);
      }
    }
    return p;
  }

  Vector pack_gradient(const ParamGradient& g) const {
    Vector x(size());
    for (int i = 0; i < size(); ++i) {
      const auto& s = slots[i];
      switch (s.kind) {
        case 'f': x(i) = g.f[s.mode]; break;
        case 'r': x(i) = g.r[s.mode]; break;
        case 'z': x(i) = g.z[s.mode]; break;
        default: {
          double acc = 0.0;
          for (int q : s.orbitals) acc += g.eta[s.mode](q);
          x(i) = acc;
        }
      }
    }
    return x;
  }

  /// Gradient with components pushing out of an active bound removed.
  Vector projected(const Vector& x, const Vector& g) const {
    Vector pg = g;
    for (int i = 0; i < size(); ++i)
      if ((x(i) <= lower(i) && g(i) > 0.0) || (x(i) >= upper(i) && g(i) < 0.0)) pg(i) = 0.0;
    return pg;
  }

  Vector clip(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

/// One relaxed evaluation: converge rho at fixed parameters, then the energy and gradient.
struct Evaluation {
  VariationalParams params;
  Roothaan scf;
  double energy = 0.0;
  Vector gradient;
  EnergyDecomposition parts;
};

inline Evaluation evaluate(const DipoleFrame& fr, AnsatzKind kind, const ParamLayout& layout,
                           const VariationalParams& p, const Matrix& rho0, int n_occ, const SCFOptions& opt) {
  Evaluation ev;
  ev.params = p;
  const auto dh = dress(fr, kind, p, opt.squeeze_cap);
  ev.scf = roothaan(dh, rho0, n_occ, opt);
  ev.parts = total_energy(dh, ev.scf.rho);
  ev.energy = ev.parts.total;
  ev.gradient = layout.pack_gradient(parameter_gradient(dh, ev.scf.rho));
  return ev;
}

struct Start {
  std::string label;
  VariationalParams params;
  Matrix rho;
};

/// Projected BFGS over the free parameters, each evaluation relaxing rho by Roothaan/DIIS.
inline SCFResult optimize_from(const DipoleFrame& fr, AnsatzKind kind, const Start& start, const SCFOptions& opt) {
  const int n_occ = fr.n_electrons / 2;
  const ParamLayout layout(fr, kind, opt);
  SCFResult res;
  res.ansatz = kind;
  res.start = start.label;

  VariationalParams base = start.params;
  Vector x = layout.clip(layout.pack(base));
  base = layout.unpack(x, base);
  Evaluation cur = evaluate(fr, kind, layout, base, start.rho, n_occ, opt);
  const int nx = layout.size();
  Matrix Hinv = Matrix::Identity(nx, nx);
  bool scaled = false;
  double e_prev = std::numeric_limits<double>::infinity();

  auto record = [&](int it) {
    const Vector pg = layout.projected(x, cur.gradient);
    TraceEntry t{it, cur.energy, nx ? pg.cwiseAbs().maxCoeff() : 0.0, cur.scf.commutator};
    res.trace.push_back(t);
    return t;
  };

  for (int it = 0; it < opt.max_macro; ++it) {
    const TraceEntry t = record(it);
    res.macro_iterations = it + 1;
    if (t.gradient_norm < opt.tol_gradient && std::abs(cur.energy - e_prev) < opt.tol_energy && cur.scf.converged) {
      res.converged = true;
      break;
    }
    if (nx == 0) {
      res.converged = cur.scf.converged;
      break;
    }
    e_prev = cur.energy;

    Vector pg = layout.projected(x, cur.gradient);
    std::vector<bool> active(nx);
    for (int i = 0; i < nx; ++i) active[i] = pg(i) == 0.0 && cur.gradient(i) != 0.0;
    Vector d = -Hinv * pg;
    for (int i = 0; i < nx; ++i)
      if (active[i]) d(i) = 0.0;
    if (d.dot(pg) >= 0.0) {
      Hinv.setIdentity();
      scaled = false;
      d = -pg;
    }
    if (!scaled) {
      const double dn = d.cwiseAbs().maxCoeff();
      if (dn > 0.1) d *= 0.1 / dn;
    }

    double alpha = 1.0;
    Evaluation trial;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vector xt = layout.clip(x + alpha * d);
      trial = evaluate(fr, kind, layout, layout.unpack(xt, base), cur.scf.rho, n_occ, opt);
      if (trial.energy <= cur.energy + 1e-4 * cur.gradient.dot(xt - x) + 1e-14 * std::abs(cur.energy)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No descent along the quasi-Newton direction; steepest descent restart next time.
      if (!scaled) {
        const TraceEntry last = record(it + 1);
        res.converged = last.gradient_norm < 10.0 * opt.tol_gradient && cur.scf.converged;
        break;
      }
      Hinv.setIdentity();
      scaled = false;
      continue;
    }
    const Vector xn = layout.clip(x + alpha * d);
    const Vector s = xn - x;
    const Vector y = trial.gradient - cur.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-16) {
      if (!scaled) {
        Hinv = Matrix::Identity(nx, nx) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho_k = 1.0 / sy;
      const Matrix I = Matrix::Identity(nx, nx);
      Hinv = (I - rho_k * s * y.transpose()) * Hinv * (I - rho_k * y * s.transpose()) + rho_k * s * s.transpose();
    }
    x = xn;
    base = trial.params;
    cur = std::move(trial);
  }

  res.params = cur.params;
  res.energy = cur.parts;
  res.frame_density = cur.scf.rho;
  res.density = fr.rotation * cur.scf.rho * fr.rotation.transpose();
  res.coefficients = fr.rotation * cur.scf.C;
  res.orbital_energies = cur.scf.eps;
  res.commutator_norm = cur.scf.commutator;
  res.gradient_norm = res.trace.empty() ? 0.0 : res.trace.back().gradient_norm;
  for (std::size_t i = 4; i < res.trace.size(); ++i)
    if (res.trace[i].energy > res.trace[i - 1].energy + 1e-10 * std::max(1.0, std::abs(res.trace[i].energy)))
      res.descent_violation = true;
  if (res.descent_violation) warn("SCF energy trace increased after the initial iterations");
  return res;
}

inline Matrix core_density(const DipoleFrame& fr) { return aufbau(symmetric_eigen(fr.h).vectors, fr.n_electrons / 2); }

inline VariationalParams default_params(const DipoleFrame& fr, AnsatzKind kind) {
  return uniform_params(fr, kind, 0.0, 0.0, 0.0);
}

/// Apply frozen entries of `fixed` onto `p`.
inline VariationalParams apply_frozen(VariationalParams p, const VariationalParams& fixed, AnsatzKind k,
                                      const SCFOptions& opt) {
  if (has_f(k) && opt.freeze_f) p.f = fixed.f;
  if (has_r(k) && opt.freeze_r) p.r = fixed.r;
  if (has_z(k) && opt.freeze_z) p.z = fixed.z;
  if (has_eta(k) && opt.freeze_eta) p.eta = fixed.eta;
  return p;
}

}  // namespace detail

inline SCFResult scf_solve(const DipoleFrame& fr, AnsatzKind kind, const SCFOptions& opt = {});

namespace detail {

inline std::vector<Start> starting_points(const DipoleFrame& fr, AnsatzKind kind, const SCFOptions& opt) {
  const Matrix rho0 = core_density(fr);
  VariationalParams fixed = opt.initial ? *opt.initial : default_params(fr, kind);
  validate_params(fr, kind, fixed, opt.squeeze_cap);
  std::vector<Start> starts;

  // Seed 1: perturbative f from the slope of the energy at f = 0, coherent shift from <d>.
  {
    VariationalParams p = default_params(fr, kind);
    if (has_z(kind))
      for (int a = 0; a < fr.n_modes(); ++a)
        p.z[a] = 2.0 * fr.g[a].dot(rho0.diagonal()) / std::sqrt(2.0 * fr.omega[a]);
    if (has_f(kind)) {
      for (int a = 0; a < fr.n_modes(); ++a) {
        VariationalParams q = p;
        const double h = 0.1;
        const double g0 = parameter_gradient(dress(fr, kind, q), rho0).f[a];
        q.f[a] = h;
        const double g1 = parameter_gradient(dress(fr, kind, q), rho0).f[a];
        const double slope = (g1 - g0) / h;
        double f0 = slope > 0.0 ? -g0 / slope : (g0 < 0.0 ? 1.0 : 0.0);
        p.f[a] = std::clamp(f0, 0.0, 1.0);
      }
    }
    if (opt.initial) starts.push_back({"initial", *opt.initial, rho0});
    if (!opt.initial || opt.multi_start) starts.push_back({"perturbative", apply_frozen(p, fixed, kind, opt), rho0});
  }
  if (!opt.multi_start) return starts;

  if (has_f(kind)) {
    VariationalParams p = default_params(fr, kind);
    for (auto& f : p.f) f = 1.0;
    if (has_r(kind) && opt.initial) p.r = opt.initial->r;
    starts.push_back({"polaron", apply_frozen(p, fixed, kind, opt), rho0});

    // Embed the best solution of the parent ansatz: CS for VT, VT for GSS and SGS.
    SCFOptions sub = opt;
    sub.initial.reset();
    sub.freeze_f = sub.freeze_r = sub.freeze_z = sub.freeze_eta = false;
    if (kind == AnsatzKind::VT) {
      const SCFResult cs = scf_solve(fr, AnsatzKind::CS, sub);
      VariationalParams q = default_params(fr, kind);
      for (int a = 0; a < fr.n_modes(); ++a) {
        q.f[a] = 1.0;
        const double eta = fr.n_electrons > 0 ? std::sqrt(2.0 * fr.omega[a]) * cs.params.z[a] / fr.n_electrons : 0.0;
        q.eta[a].setConstant(eta);
      }
      starts.push_back({"cs-embedding", apply_frozen(q, fixed, kind, opt), cs.frame_density});
    } else {
      sub.multi_start = true;
      const SCFResult vt = scf_solve(fr, AnsatzKind::VT, sub);
      VariationalParams q = default_params(fr, kind);
      q.f = vt.params.f;
      q.eta = vt.params.eta;
      starts.push_back({"vt-embedding", apply_frozen(q, fixed, kind, opt), vt.frame_density});
    }
  } else if (has_z(kind) && has_r(kind)) {
    // Squeezed coherent ansatze start from the converged coherent state.
    SCFOptions sub = opt;
    sub.initial.reset();
    sub.freeze_f = sub.freeze_r = sub.freeze_z = sub.freeze_eta = false;
    const SCFResult cs = scf_solve(fr, AnsatzKind::CS, sub);
    VariationalParams q = default_params(fr, kind);
    q.z = cs.params.z;
    starts.push_back({"cs-embedding", apply_frozen(q, fixed, kind, opt), cs.frame_density});
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uf(0.0, 1.0), ur(-0.3, 0.3);
  for (int k = 0; k < opt.random_starts; ++k) {
    VariationalParams p = default_params(fr, kind);
    for (auto& f : p.f) f = uf(rng);
    for (auto& r : p.r) r = ur(rng);
    for (auto& z : p.z) z = ur(rng);
    starts.push_back({"random-" + std::to_string(k), apply_frozen(p, fixed, kind, opt), rho0});
  }
  return starts;
}

}  // namespace detail

/// Minimize the mean-field energy of `kind` over rho and the free variational parameters.
inline SCFResult scf_solve(const DipoleFrame& fr, AnsatzKind kind, const SCFOptions& opt) {
  if (fr.n_electrons % 2 != 0) throw ValidationError("restricted mean field needs an even electron count");
  if (fr.n_electrons == 0) throw ValidationError("mean field needs at least two electrons");
  const auto starts = detail::starting_points(fr, kind, opt);
  std::optional<SCFResult> best;
  for (const auto& s : starts) {
    SCFResult r = detail::optimize_from(fr, kind, s, opt);
    const bool better = !best || (r.converged && !best->converged) ||
                        (r.converged == best->converged && r.energy.total < best->energy.total - 1e-12);
    if (better) best = std::move(r);
  }
  if (!best->converged) warn(std::string(ansatz_name(kind)) + " SCF did not converge");
  return *best;
}

inline SCFResult scf_solve(const ElectronBosonSystem& sys, AnsatzKind kind, const SCFOptions& opt = {}) {
  const DipoleFrame fr = DipoleFrame::from(sys);
  return scf_solve(fr, kind, opt);
}

struct ScanPoint {
  double value = 0.0;
  double energy = 0.0;
  bool converged = false;
  std::string status;
  SCFResult result;
};

/// Solve with `param` ("f", "r" or "z") frozen at each grid value on every mode.
inline std::vector<ScanPoint> scan_parameter(const DipoleFrame& fr, AnsatzKind kind, const std::string& param,
                                             const std::vector<double>& grid, SCFOptions opt = {}) {
  if ((param == "f" && !has_f(kind)) || (param == "r" && !has_r(kind)) || (param == "z" && !has_z(kind)) ||
      (param != "f" && param != "r" && param != "z"))
    throw ValidationError("cannot scan '" + param + "' for " + ansatz_name(kind));
  std::vector<ScanPoint> out;
  for (double v : grid) {
    if (!std::isfinite(v)) throw ValidationError("scan grid values must be finite");
    ScanPoint pt;
    pt.value = v;
    SCFOptions o = opt;
    VariationalParams init = o.initial ? *o.initial : detail::default_params(fr, kind);
    std::vector<double>* target = param == "f" ? &init.f : param == "r" ? &init.r : &init.z;
    for (auto& x : *target) x = v;
    o.initial = init;
    o.freeze_f = opt.freeze_f || param == "f";
    o.freeze_r = opt.freeze_r || param == "r";
    o.freeze_z = opt.freeze_z || param == "z";
    try {
      pt.result = scf_solve(fr, kind, o);
      pt.energy = pt.result.energy.total;
      pt.converged = pt.result.converged;
      pt.status = pt.converged ? "ok" : "not_converged";
    } catch (const Error& e) {
      pt.energy = std::numeric_limits<double>::quiet_NaN();
      pt.status = std::string("error: ") + e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace vsq
