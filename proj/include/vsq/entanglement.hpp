#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "vsq/boson_algebra.hpp"
#include "vsq/determinants.hpp"
#include "vsq/entropy.hpp"
#include "vsq/error.hpp"
#include "vsq/linalg.hpp"
#include "vsq/scf.hpp"
#include "vsq/transforms.hpp"

namespace vsq {

/// One photon branch |z, r> = D(z) S(r)|0> with its electronic weight.
struct PolaritonBranch {
  double weight = 0.0;
  double z = 0.0;
};

/// Photon side of a mean-field state sum_I C_I |I> |z_I, r> for one mode, with determinants
/// of equal displacement merged into one branch.
struct MeanFieldPolaritonState {
  int mode = 0;
  double r = 0.0;
  std::vector<PolaritonBranch> branches;  ///< sorted by z, weights renormalized to sum 1
  std::vector<int> branch_of;             ///< per determinant (DeterminantSpace order), -1 if truncated
  double discarded_weight = 0.0;          ///< weight dropped by the cumulative-weight cutoff
};

namespace detail {

struct SpinStrings {
  std::vector<std::uint32_t> bits;
  std::vector<double> amplitude;
};

/// Expansion coefficients det(C[I, occ]) of a closed-shell determinant over the strings of
/// one spin.
inline SpinStrings spin_expansion(const DeterminantSpace& space, const Matrix& c_occ) {
  SpinStrings out;
  out.bits = space.alpha_strings();
  const int n = space.n_orbitals();
  const int k = static_cast<int>(c_occ.cols());
  for (auto s : out.bits) {
    if (k == 0) {
      out.amplitude.push_back(1.0);
      continue;
    }
    Matrix sub(k, k);
    int row = 0;
    for (int p = 0; p < n; ++p)
      if ((s >> p) & 1u) sub.row(row++) = c_occ.row(p);
    out.amplitude.push_back(sub.partialPivLu().determinant());
  }
  return out;
}

/// Photon displacement per unit of eta_hat = sum_p eta_p n_p and the branch squeeze of one mode.
inline std::pair<double, double> branch_scale(AnsatzKind kind, const VariationalParams& p, double omega, int a) {
  const double f = has_f(kind) ? p.f[a] : 0.0;
  const double r = has_r(kind) ? p.r[a] : 0.0;
  double scale = -f / std::sqrt(2.0 * omega);
  // S(r) D(x) = D(e^{-r} x) S(r) brings the SGS state into D S order.
  if (kind == AnsatzKind::SGS) scale *= std::exp(-r);
  return {scale, r};
}

inline double branch_shift(AnsatzKind kind, const VariationalParams& p, int a) {
  if (!has_z(kind)) return 0.0;
  const double z = -p.z[a];
  return kind == AnsatzKind::SCS ? z * std::exp(-p.r[a]) : z;
}

}  // namespace detail

/// Expand the converged determinant in the dipole eigenbasis and group determinants by the
/// photon displacement of `mode`. Branches are kept in order of decreasing weight until the
/// cumulative weight reaches 1 - cutoff.
inline MeanFieldPolaritonState mean_field_wavefunction(const SCFResult& scf, const DipoleFrame& fr, int mode = 0,
                                                       double cutoff = 1e-8) {
  if (!scf.converged) throw ConvergenceError("mean-field wavefunction needs a converged SCF result");
  if (mode < 0 || mode >= fr.n_modes()) throw ValidationError("mode index out of range");
  const int n = fr.n_orbitals;
  const int k = fr.n_electrons / 2;
  if (scf.coefficients.rows() != n) throw ValidationError("SCF result does not match the system");
  const DeterminantSpace space(n, k, k);
  const Matrix c_occ = fr.rotation.transpose() * scf.coefficients.leftCols(k);
  const auto spin = detail::spin_expansion(space, c_occ);

  const auto [scale, r] = detail::branch_scale(scf.ansatz, scf.params, fr.omega[mode], mode);
  const double shift = detail::branch_shift(scf.ansatz, scf.params, mode);
  const Vector& eta = has_eta(scf.ansatz) ? scf.params.eta[mode] : fr.g[mode];
  std::vector<double> s_eta;
  for (auto s : spin.bits) {
    double x = 0.0;
    for (int p = 0; p < n; ++p)
      if ((s >> p) & 1u) x += eta(p);
    s_eta.push_back(x);
  }

  const int ns = static_cast<int>(spin.bits.size());
  const int nd = ns * ns;
  std::vector<double> z(nd), w(nd);
  for (int ia = 0; ia < ns; ++ia)
    for (int ib = 0; ib < ns; ++ib) {
      const int i = ia * ns + ib;
      z[i] = shift + scale * (s_eta[ia] + s_eta[ib]);
      const double c = spin.amplitude[ia] * spin.amplitude[ib];
      w[i] = c * c;
    }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-10) throw Error("determinant expansion weights sum to " + std::to_string(total));

  std::vector<int> order(nd);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return z[a] < z[b] || (z[a] == z[b] && a < b); });
  std::vector<PolaritonBranch> groups;
  std::vector<int> group_of(nd);
  for (int i : order) {
    if (groups.empty() || std::abs(z[i] - groups.back().z) > 1e-10) groups.push_back({0.0, z[i]});
    groups.back().weight += w[i];
    group_of[i] = static_cast<int>(groups.size()) - 1;
  }

  std::vector<int> by_weight(groups.size());
  std::iota(by_weight.begin(), by_weight.end(), 0);
  std::stable_sort(by_weight.begin(), by_weight.end(),
                   [&](int a, int b) { return groups[a].weight > groups[b].weight; });
  std::vector<bool> keep(groups.size(), false);
  double kept = 0.0;
  for (int g : by_weight) {
    if (kept >= 1.0 - cutoff) break;
    keep[g] = true;
    kept += groups[g].weight;
  }

  MeanFieldPolaritonState out;
  out.mode = mode;
  out.r = r;
  out.discarded_weight = std::max(0.0, total - kept);
  std::vector<int> new_index(groups.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (keep[g]) {
      new_index[g] = static_cast<int>(out.branches.size());
      out.branches.push_back({groups[g].weight / kept, groups[g].z});
    }
  out.branch_of.resize(nd);
  for (int i = 0; i < nd; ++i) out.branch_of[i] = new_index[group_of[i]];
  return out;
}

/// rho_ph = sum_mu w_mu |z_mu, r><z_mu, r| in the Fock basis |0>..|n_max>, trace renormalized.
/// Warns when a branch loses more than 1e-8 of its norm to the truncation and throws beyond 1e-6.
inline Matrix photon_rdm(const MeanFieldPolaritonState& state, int n_max) {
  if (state.branches.empty()) throw ValidationError("polariton state has no branches");
  const TruncatedFockBasis basis{n_max};
  Matrix rho = Matrix::Zero(basis.dim(), basis.dim());
  double worst = 0.0;
  for (const auto& b : state.branches) {
    const auto amp = fock_amplitudes({b.z, state.r, Ordering::DS}, basis);
    worst = std::max(worst, amp.truncation_loss);
    rho += b.weight * amp.amplitudes * amp.amplitudes.transpose();
  }
  if (worst > 1e-6)
    throw TruncationError("photon RDM: n_max=" + std::to_string(n_max) + " loses " + std::to_string(worst) +
                          " of a branch norm");
  if (worst > 1e-8) warn("photon RDM truncation loss " + std::to_string(worst));
  rho /= rho.trace();
  return 0.5 * (rho + rho.transpose());
}

/// Smallest n_max (from 20, growing by 10) that holds every branch to 1e-13.
inline int photon_rdm_cutoff(const MeanFieldPolaritonState& state) {
  for (int n_max = 20; n_max <= detail::kMaxPaddedDim / 2; n_max += 10) {
    const TruncatedFockBasis basis{n_max};
    bool ok = true;
    for (const auto& b : state.branches)
      if (fock_amplitudes({b.z, state.r, Ordering::DS}, basis).truncation_loss > 1e-13) {
        ok = false;
        break;
      }
    if (ok) return n_max;
  }
  throw TruncationError("photon RDM: branches are not captured by a tractable Fock basis");
}

/// Weighted Gram matrix M_mu,nu = sqrt(w_mu w_nu) <z_mu, r|z_nu, r>; its nonzero spectrum
/// equals that of rho_ph.
inline Matrix branch_gram_matrix(const MeanFieldPolaritonState& state) {
  const int nb = static_cast<int>(state.branches.size());
  Matrix M(nb, nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      const auto& a = state.branches[i];
      const auto& b = state.branches[j];
      M(i, j) = std::sqrt(a.weight * b.weight) *
                overlap_closed_form({a.z, state.r, Ordering::DS}, {b.z, state.r, Ordering::DS});
    }
  return M;
}

/// Entropy of the photon RDM by Fock-basis expansion.
inline double fock_route_entropy(const MeanFieldPolaritonState& state, int n_max = 0) {
  if (state.branches.size() == 1) return 0.0;
  return von_neumann_entropy(photon_rdm(state, n_max > 0 ? n_max : photon_rdm_cutoff(state)));
}

/// Entropy of the photon RDM from the branch Gram matrix.
inline double gram_route_entropy(const MeanFieldPolaritonState& state) {
  if (state.branches.size() == 1) return 0.0;
  return von_neumann_entropy(branch_gram_matrix(state));
}

struct EntanglementResult {
  std::vector<double> entropy;  ///< per mode, Fock route
  std::vector<double> gram_entropy;
  std::vector<int> branches;
  double mean_entropy = 0.0;
  double max_route_gap = 0.0;
};

/// Per-mode photon entropies of a converged mean-field solution, with the Gram-route
/// cross-check enforced to 1e-8.
inline EntanglementResult mean_field_entanglement(const SCFResult& scf, const DipoleFrame& fr) {
  EntanglementResult out;
  for (int a = 0; a < fr.n_modes(); ++a) {
    const auto state = mean_field_wavefunction(scf, fr, a);
    const double s = fock_route_entropy(state);
    const double sg = gram_route_entropy(state);
    out.entropy.push_back(s);
    out.gram_entropy.push_back(sg);
    out.branches.push_back(static_cast<int>(state.branches.size()));
    out.max_route_gap = std::max(out.max_route_gap, std::abs(s - sg));
  }
  if (out.max_route_gap > 1e-8)
    throw Error("photon entropy: Fock and Gram routes disagree by " + std::to_string(out.max_route_gap));
  for (double s : out.entropy) out.mean_entropy += s;
  if (!out.entropy.empty()) out.mean_entropy /= out.entropy.size();
  return out;
}

}  // namespace vsq
