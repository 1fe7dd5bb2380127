#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "vsq/error.hpp"
#include "vsq/linalg.hpp"

namespace vsq {

/// Slater determinants with fixed alpha and beta electron counts over n spatial orbitals.
/// A determinant is a 2n-bit string: alpha orbital p is bit p, beta orbital p is bit n + p,
/// and creation operators are ordered by bit index. Index = alpha_rank * n_beta_strings + beta_rank.
class DeterminantSpace {
 public:
  DeterminantSpace(int n_orbitals, int n_alpha, int n_beta) : n_(n_orbitals), na_(n_alpha), nb_(n_beta) {
    if (n_orbitals <= 0 || n_orbitals > 31) throw ValidationError("determinant space supports 1..31 orbitals");
    if (n_alpha < 0 || n_beta < 0 || n_alpha > n_orbitals || n_beta > n_orbitals)
      throw ValidationError("electron count does not fit the orbital space");
    binom_.assign(n_ + 1, std::vector<std::uint64_t>(n_ + 1, 0));
    for (int i = 0; i <= n_; ++i) {
      binom_[i][0] = 1;
      for (int k = 1; k <= i; ++k) binom_[i][k] = binom_[i - 1][k - 1] + (k <= i - 1 ? binom_[i - 1][k] : 0);
    }
    alpha_ = strings(na_);
    beta_ = strings(nb_);
  }

  int n_orbitals() const noexcept { return n_; }
  int n_alpha() const noexcept { return na_; }
  int n_beta() const noexcept { return nb_; }
  int size() const noexcept { return static_cast<int>(alpha_.size() * beta_.size()); }
  int n_beta_strings() const noexcept { return static_cast<int>(beta_.size()); }
  const std::vector<std::uint32_t>& alpha_strings() const noexcept { return alpha_; }
  const std::vector<std::uint32_t>& beta_strings() const noexcept { return beta_; }

  std::uint64_t bits(int index) const {
    const auto a = alpha_[index / beta_.size()];
    const auto b = beta_[index % beta_.size()];
    return static_cast<std::uint64_t>(a) | (static_cast<std::uint64_t>(b) << n_);
  }

  int index(std::uint64_t det) const {
    const auto a = static_cast<std::uint32_t>(det & ((std::uint64_t{1} << n_) - 1));
    const auto b = static_cast<std::uint32_t>(det >> n_);
    return static_cast<int>(rank(a) * beta_.size() + rank(b));
  }

  /// Occupation (0, 1, 2) of spatial orbital p.
  int occupation(int index, int p) const {
    const auto d = bits(index);
    return static_cast<int>(((d >> p) & 1u) + ((d >> (n_ + p)) & 1u));
  }

 private:
  std::vector<std::uint32_t> strings(int k) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = 0; s < (std::uint32_t{1} << n_); ++s)
      if (std::popcount(s) == k) out.push_back(s);
    return out;
  }

  /// Position of s among strings of equal popcount in increasing order.
  std::uint64_t rank(std::uint32_t s) const {
    std::uint64_t r = 0;
    int k = 0;
    for (int p = 0; p < n_; ++p)
      if ((s >> p) & 1u) r += binom_[p][++k];
    return r;
  }

  int n_, na_, nb_;
  std::vector<std::vector<std::uint64_t>> binom_;
  std::vector<std::uint32_t> alpha_, beta_;
};

namespace detail {

/// Apply a_k (create=false) or a_k^dag to det in place; returns the sign, or 0 if annihilated.
inline int apply_fermion_op(std::uint64_t& det, int k, bool create) {
  const std::uint64_t bit = std::uint64_t{1} << k;
  if (static_cast<bool>(det & bit) == create) return 0;
  const int sign = (std::popcount(det & (bit - 1)) & 1) ? -1 : 1;
  det ^= bit;
  return sign;
}

}  // namespace detail

/// One matrix element of a second-quantized one- or two-body term:
/// <bra| a^dag_p a_q |ket> or <bra| a^dag_p a^dag_r a_s a_q |ket>, spatial labels, spin summed
/// by the caller's enumeration.
struct ElectronTerm {
  int bra = 0;
  int ket = 0;
  double value = 0.0;
  std::array<int, 4> orbitals{};  ///< (p, q) or (p, q, r, s) in chemist labelling
  bool two_body = false;
};

/// Enumerate the nonzero matrix elements of
///   sum_pq h_pq sum_s a^dag_ps a_qs + 1/2 sum_pqrs (pq|rs) sum_st a^dag_ps a^dag_rt a_st a_qs
/// between determinants of `space`. The scalar core energy is not included.
template <class Fn>
void for_each_electron_term(const DeterminantSpace& space, const Matrix& h, const Tensor4& eri, Fn&& fn,
                            double zero_tol = 0.0) {
  const int n = space.n_orbitals();
  for (int ket = 0; ket < space.size(); ++ket) {
    const std::uint64_t d0 = space.bits(ket);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double hv = h(p, q);
        if (std::abs(hv) <= zero_tol) continue;
        for (int s = 0; s < 2; ++s) {
          std::uint64_t d = d0;
          int sign = detail::apply_fermion_op(d, q + s * n, false);
          if (!sign) continue;
          sign *= detail::apply_fermion_op(d, p + s * n, true);
          if (!sign) continue;
          fn(ElectronTerm{space.index(d), ket, sign * hv, {p, q, 0, 0}, false});
        }
      }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            const double v = eri(p, q, r, s);
            if (std::abs(v) <= zero_tol) continue;
            for (int sp = 0; sp < 2; ++sp)
              for (int tp = 0; tp < 2; ++tp) {
                std::uint64_t d = d0;
                int sign = detail::apply_fermion_op(d, q + sp * n, false);
                if (!sign) continue;
                sign *= detail::apply_fermion_op(d, s + tp * n, false);
                if (!sign) continue;
                sign *= detail::apply_fermion_op(d, r + tp * n, true);
                if (!sign) continue;
                sign *= detail::apply_fermion_op(d, p + sp * n, true);
                if (!sign) continue;
                fn(ElectronTerm{space.index(d), ket, 0.5 * sign * v, {p, q, r, s}, true});
              }
          }
  }
}

/// Dense matrix of the electronic Hamiltonian (including the core energy) on `space`.
inline Matrix electron_hamiltonian(const DeterminantSpace& space, const Matrix& h, const Tensor4& eri,
                                   double e_core) {
  Matrix H = Matrix::Zero(space.size(), space.size());
  for_each_electron_term(space, h, eri, [&](const ElectronTerm& t) { H(t.bra, t.ket) += t.value; });
  H.diagonal().array() += e_core;
  return H;
}

/// Dense matrix of the spin-summed one-body operator sum_pq m_pq a^dag_p a_q on `space`.
inline Matrix one_body_operator(const DeterminantSpace& space, const Matrix& m) {
  Matrix H = Matrix::Zero(space.size(), space.size());
  const int n = space.n_orbitals();
  for (int ket = 0; ket < space.size(); ++ket) {
    const std::uint64_t d0 = space.bits(ket);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (m(p, q) == 0.0) continue;
        for (int s = 0; s < 2; ++s) {
          std::uint64_t d = d0;
          int sign = detail::apply_fermion_op(d, q + s * n, false);
          if (!sign) continue;
          sign *= detail::apply_fermion_op(d, p + s * n, true);
          if (!sign) continue;
          H(space.index(d), ket) += sign * m(p, q);
        }
      }
  }
  return H;
}

}  // namespace vsq
