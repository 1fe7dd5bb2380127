#pragma once

#include <cmath>
#include <string>

#include "vsq/error.hpp"
#include "vsq/linalg.hpp"

namespace vsq {

/// S = -sum lambda ln lambda (k_B = 1) over the eigenvalues of a density matrix.
/// Eigenvalues below 1e-14 are dropped; negative ones beyond -1e-12 are clipped with a warning.
inline double von_neumann_entropy(const Matrix& rho, double trace_tol = 1e-8) {
  require_square(rho, "density matrix");
  if (hermiticity_defect(rho) > 1e-10) throw ValidationError("density matrix is not Hermitian");
  const double tr = rho.trace();
  if (std::abs(tr - 1.0) > trace_tol) throw ValidationError("density matrix trace " + std::to_string(tr) + " != 1");
  const auto es = symmetric_eigen(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double l = es.values(i);
    if (l < -1e-12) warn("density matrix eigenvalue " + std::to_string(l) + " clipped to zero");
    if (l > 1e-14) s -= l * std::log(l);
  }
  return s;
}

}  // namespace vsq
