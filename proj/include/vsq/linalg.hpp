#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "vsq/error.hpp"

namespace vsq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense rank-4 tensor of two-electron integrals in chemist order (pq|rs).
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const noexcept { return n_; }

  double& operator()(int p, int q, int r, int s) { return data_[index(p, q, r, s)]; }
  double operator()(int p, int q, int r, int s) const { return data_[index(p, q, r, s)]; }

  /// Assign (pq|rs) and its seven permutational partners.
  void set_symmetric(int p, int q, int r, int s, double v) {
    (*this)(p, q, r, s) = v;
    (*this)(q, p, r, s) = v;
    (*this)(p, q, s, r) = v;
    (*this)(q, p, s, r) = v;
    (*this)(r, s, p, q) = v;
    (*this)(s, r, p, q) = v;
    (*this)(r, s, q, p) = v;
    (*this)(s, r, q, p) = v;
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  /// Largest violation of the eight-fold real permutational symmetry.
  double symmetry_defect() const {
    double worst = 0.0;
    for (int p = 0; p < n_; ++p)
      for (int q = 0; q < n_; ++q)
        for (int r = 0; r < n_; ++r)
          for (int s = 0; s < n_; ++s) {
            const double v = (*this)(p, q, r, s);
            worst = std::max({worst, std::abs(v - (*this)(q, p, r, s)),
                              std::abs(v - (*this)(p, q, s, r)),
                              std::abs(v - (*this)(r, s, p, q))});
          }
    return worst;
  }

  /// (pq|rs) -> sum A_p'p A_q'q A_r'r A_s's (p'q'|r's'), i.e. integrals in the basis of A's columns.
  Tensor4 rotated(const Matrix& a) const {
    const int n = n_;
    Tensor4 tmp(n), out(n);
    // Four quarter transformations, O(n^5).
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += a(k, p) * (*this)(k, q, r, s);
            out(p, q, r, s) = acc;
          }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += a(k, q) * out(p, k, r, s);
            tmp(p, q, r, s) = acc;
          }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += a(k, r) * tmp(p, q, k, s);
            out(p, q, r, s) = acc;
          }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += a(k, s) * out(p, q, r, k);
            tmp(p, q, r, s) = acc;
          }
    return tmp;
  }

 private:
  std::size_t index(int p, int q, int r, int s) const noexcept {
    return ((static_cast<std::size_t>(p) * n_ + q) * n_ + r) * n_ + s;
  }

  int n_ = 0;
  std::vector<double> data_;
};

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m - m.transpose());
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " must be square");
}

/// Symmetric eigendecomposition with ascending eigenvalues and a deterministic sign:
/// the largest-magnitude component of every eigenvector is positive.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

inline SymmetricEigen symmetric_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  SymmetricEigen out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    // First component within round-off of the maximum, so ties resolve by index.
    const double vmax = out.vectors.col(k).cwiseAbs().maxCoeff();
    Eigen::Index imax = 0;
    while (std::abs(out.vectors(imax, k)) < vmax - 1e-12) ++imax;
    if (out.vectors(imax, k) < 0) out.vectors.col(k) *= -1.0;
  }
  return out;
}

}  // namespace vsq
