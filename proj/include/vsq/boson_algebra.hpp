#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "vsq/error.hpp"
#include "vsq/linalg.hpp"

namespace vsq {

inline constexpr double kDefaultSqueezeCap = 5.0;

/// Fock states |0>..|n_max> of one boson mode.
struct TruncatedFockBasis {
  int n_max = 10;

  int dim() const noexcept { return n_max + 1; }
  void validate() const {
    if (n_max < 1) throw ValidationError("Fock truncation n_max must be >= 1");
  }
};

inline Matrix annihilation(int dim) {
  Matrix b = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

inline Matrix creation(int dim) { return annihilation(dim).transpose(); }

inline Matrix number_operator(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = k;
  return n;
}

/// exp(z b^dag - z b) of the generator truncated to `dim` states (no convergence control).
inline Matrix raw_displacement(double z, int dim) {
  const Matrix b = annihilation(dim);
  const Matrix gen = z * (b.transpose() - b);
  return gen.exp();
}

/// exp(r/2 (b^2 - b^dag^2)) of the generator truncated to `dim` states.
inline Matrix raw_squeeze(double r, int dim) {
  const Matrix b = annihilation(dim);
  const Matrix b2 = b * b;
  const Matrix gen = 0.5 * r * (b2 - b2.transpose());
  return gen.exp();
}

namespace detail {

inline constexpr int kMaxPaddedDim = 900;
inline constexpr double kBlockTolerance = 1e-12;

/// Lowest n x n block of exp(generator), computed in a padded space and checked against a
/// space 10 states larger. The padding doubles until the two agree.
template <class Raw>
Matrix converged_block(Raw raw, int n, int pad, const std::string& what) {
  while (true) {
    const int d = n + pad;
    if (d + 10 > kMaxPaddedDim)
      throw TruncationError(what + ": no converged representation within " + std::to_string(kMaxPaddedDim) +
                            " Fock states");
    const Matrix a = raw(d);
    const Matrix b = raw(d + 10);
    if (max_abs(a.topLeftCorner(n, n) - b.topLeftCorner(n, n)) < kBlockTolerance) return b.topLeftCorner(n, n);
    pad *= 2;
  }
}

inline void check_squeeze(double r, double cap) {
  if (!std::isfinite(r)) throw ValidationError("squeeze parameter must be finite");
  if (std::abs(r) > cap) throw ValidationError("|r| exceeds the squeeze cap " + std::to_string(cap));
}

}  // namespace detail

/// D(z) = exp(z b^dag - z b) on |0>..|n_max>. The entries are those of the untruncated
/// operator (to 1e-12), so the block is unitary only up to leakage out of the basis.
inline Matrix displacement_matrix(double z, const TruncatedFockBasis& basis) {
  basis.validate();
  if (!std::isfinite(z)) throw ValidationError("displacement must be finite");
  if (z == 0.0) return Matrix::Identity(basis.dim(), basis.dim());
  const int pad = 12 + static_cast<int>(std::ceil(2.0 * std::abs(z) * std::sqrt(basis.dim()) + z * z));
  return detail::converged_block([z](int d) { return raw_displacement(z, d); }, basis.dim(), pad, "displacement");
}

/// S(r) = exp(r/2 (b^2 - b^dag^2)); S^dag b S = cosh(r) b - sinh(r) b^dag.
inline Matrix squeeze_matrix(double r, const TruncatedFockBasis& basis, double cap = kDefaultSqueezeCap) {
  basis.validate();
  detail::check_squeeze(r, cap);
  if (r == 0.0) return Matrix::Identity(basis.dim(), basis.dim());
  const int pad = 16 + static_cast<int>(std::ceil(basis.dim() * (std::cosh(2.0 * r) - 1.0)));
  return detail::converged_block([r](int d) { return raw_squeeze(r, d); }, basis.dim(), pad, "squeeze");
}

/// Lowest n x n block of an operator expression built by `make(dim)` from dim-state matrices,
/// grown until it agrees with the block built from 10 more states.
template <class Make>
Matrix converged_operator_block(Make make, int n, int pad = 20) {
  Matrix prev = make(n + pad).topLeftCorner(n, n);
  while (true) {
    if (n + pad + 10 > detail::kMaxPaddedDim)
      throw TruncationError("operator product: no converged block within " + std::to_string(detail::kMaxPaddedDim) +
                            " Fock states");
    Matrix next = make(n + pad + 10).topLeftCorner(n, n);
    if (max_abs(next - prev) < detail::kBlockTolerance) return next;
    prev = std::move(next);
    pad += 10;
  }
}

enum class Ordering { DS, SD };

/// D(z) S(r)|0> (DS ordering) or S(r) D(z)|0> (SD ordering), real parameters.
struct SqueezedCoherentState {
  double z = 0.0;
  double r = 0.0;
  Ordering ordering = Ordering::DS;
};

struct FockAmplitudes {
  Vector amplitudes;
  double truncation_loss = 0.0;  ///< 1 - squared norm captured by the basis
};

/// Amplitudes <n|state> for n <= n_max: the operators act on the vacuum in a padded space that
/// grows until the leading amplitudes stop changing.
inline FockAmplitudes fock_amplitudes(const SqueezedCoherentState& s, const TruncatedFockBasis& basis,
                                      double cap = kDefaultSqueezeCap) {
  basis.validate();
  detail::check_squeeze(s.r, cap);
  if (!std::isfinite(s.z)) throw ValidationError("displacement must be finite");
  auto column = [&](int d) {
    const Vector e0 = Vector::Unit(d, 0);
    const Vector v = s.ordering == Ordering::DS ? Vector(raw_displacement(s.z, d) * (raw_squeeze(s.r, d) * e0))
                                                : Vector(raw_squeeze(s.r, d) * (raw_displacement(s.z, d) * e0));
    return Vector(v.head(basis.dim()));
  };
  const double sh = std::sinh(std::abs(s.r));
  int d = basis.dim() + 12 + static_cast<int>(std::ceil(4.0 * s.z * s.z + 8.0 * sh * sh + 6.0 * std::abs(s.r)));
  Vector v = column(d);
  while (true) {
    if (d + 20 > detail::kMaxPaddedDim) throw TruncationError("squeezed coherent state: amplitudes did not converge");
    Vector w = column(d + 20);
    const bool done = (w - v).cwiseAbs().maxCoeff() < detail::kBlockTolerance;
    v = std::move(w);
    d += 20;
    if (done) break;
  }
  FockAmplitudes out;
  out.amplitudes = v;
  out.truncation_loss = std::max(0.0, 1.0 - out.amplitudes.squaredNorm());
  return out;
}

/// Closed form of <z1, r|z2, r> for a shared squeeze r.
inline double overlap_closed_form(const SqueezedCoherentState& a, const SqueezedCoherentState& b) {
  if (a.r != b.r || a.ordering != b.ordering)
    throw ValidationError("overlap requires a shared squeeze and ordering");
  const double dz = a.z - b.z;
  const double scale = a.ordering == Ordering::DS ? std::exp(2.0 * a.r) : 1.0;
  return std::exp(-0.5 * scale * dz * dz);
}

/// Numeric <s1|s2> from Fock amplitude vectors; the basis grows until both states are captured
/// to 1e-14, and the result is checked against the closed form.
inline double overlap_squeezed_coherent(const SqueezedCoherentState& a, const SqueezedCoherentState& b,
                                        double cap = kDefaultSqueezeCap) {
  if (a.r != b.r || a.ordering != b.ordering)
    throw ValidationError("overlap requires a shared squeeze and ordering");
  for (int n_max = 40;; n_max *= 2) {
    if (n_max > detail::kMaxPaddedDim / 2)
      throw TruncationError("overlap: states not captured by a tractable Fock basis");
    const TruncatedFockBasis basis{n_max};
    const auto va = fock_amplitudes(a, basis, cap);
    const auto vb = fock_amplitudes(b, basis, cap);
    if (va.truncation_loss > 1e-14 || vb.truncation_loss > 1e-14) continue;
    const double numeric = va.amplitudes.dot(vb.amplitudes);
    const double closed = overlap_closed_form(a, b);
    if (std::abs(numeric - closed) > 1e-8)
      throw Error("overlap: Fock-amplitude value " + std::to_string(numeric) + " disagrees with closed form " +
                  std::to_string(closed));
    return numeric;
  }
}

/// Vacuum expectation of a displacement by `shift`: <0|D(shift)|0> = exp(-shift^2/2).
inline double vacuum_displacement_overlap(double shift) { return std::exp(-0.5 * shift * shift); }

/// Displacement amplitude f eta e^r / sqrt(2 omega) carried by a dressed operator X_p.
inline double dressing_amplitude(double eta, double f, double r, double omega) {
  if (!(omega > 0.0)) throw ValidationError("boson frequency must be positive");
  return f * eta * std::exp(r) / std::sqrt(2.0 * omega);
}

/// <0|X_p^dag X_q|0> with X_p = exp[-f e^r eta_p (b^dag - b)/sqrt(2 omega)]:
/// exp(-f^2 (eta_p - eta_q)^2 e^{2r} / (4 omega)).
inline double franck_condon_one_body(double eta_p, double eta_q, double f, double r, double omega) {
  return vacuum_displacement_overlap(dressing_amplitude(eta_p - eta_q, f, r, omega));
}

/// <0|X_p^dag X_q^dag X_r X_s|0>, i.e. the one-body form with xi = eta_p + eta_q - eta_r - eta_s.
inline double franck_condon_two_body(double eta_p, double eta_q, double eta_r, double eta_s, double f, double r,
                                     double omega) {
  return vacuum_displacement_overlap(dressing_amplitude(eta_p + eta_q - eta_r - eta_s, f, r, omega));
}

}  // namespace vsq
