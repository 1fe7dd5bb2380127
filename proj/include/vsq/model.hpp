#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "vsq/error.hpp"
#include "vsq/linalg.hpp"

namespace vsq {

enum class ModeLayout { PerSite, SingleCavity };
enum class Boundary { Periodic, Open };
enum class CorrelationRange { OnSite, NearestNeighbor };

/// One cavity (or phonon) mode. `coupling` is the one-body matrix (lambda . D)_{mu nu}
/// entering sqrt(omega/2) (lambda . D) (b^dag + b) and the dipole self-energy.
struct BosonMode {
  double omega = 1.0;
  double lambda = 0.0;
  Matrix coupling;
};

/// Electronic integrals (chemist convention, orthonormal orbitals) plus boson modes.
/// Immutable once built; copies are cheap enough for the small systems handled here.
struct ElectronBosonSystem {
  int n_orbitals = 0;
  int n_electrons = 0;
  Matrix h;
  Tensor4 eri;
  double e_core = 0.0;
  std::vector<BosonMode> modes;
  bool include_dse = true;
  bool include_zero_point = true;
  ModeLayout mode_layout = ModeLayout::SingleCavity;

  int n_modes() const noexcept { return static_cast<int>(modes.size()); }
  int n_alpha() const noexcept { return (n_electrons + 1) / 2; }
  int n_beta() const noexcept { return n_electrons / 2; }

  double zero_point_energy() const {
    double e = 0.0;
    if (include_zero_point)
      for (const auto& m : modes) e += 0.5 * m.omega;
    return e;
  }

  void validate() const {
    if (n_orbitals <= 0) throw ValidationError("system needs at least one orbital");
    if (n_electrons < 0 || n_electrons > 2 * n_orbitals)
      throw ValidationError("n_electrons must lie in [0, 2 n_orbitals]");
    if (h.rows() != n_orbitals || h.cols() != n_orbitals)
      throw ValidationError("one-body integrals have the wrong shape");
    if (hermiticity_defect(h) > 1e-10) throw ValidationError("one-body integrals are not Hermitian");
    if (eri.dim() != n_orbitals) throw ValidationError("two-body integrals have the wrong shape");
    if (eri.symmetry_defect() > 1e-10)
      throw ValidationError("two-body integrals violate (pq|rs) permutational symmetry");
    for (const auto& m : modes) {
      if (!(m.omega > 0.0)) throw ValidationError("boson frequency must be positive");
      if (m.coupling.rows() != n_orbitals || m.coupling.cols() != n_orbitals)
        throw ValidationError("coupling matrix has the wrong shape");
      if (hermiticity_defect(m.coupling) > 1e-10)
        throw ValidationError("coupling matrix is not Hermitian");
    }
  }
};

struct LatticeSpec {
  int n_sites = 4;
  double t = 1.0;
  double U = 0.0;
  double g = 0.0;
  double omega = 1.0;
  Boundary boundary = Boundary::Periodic;
  CorrelationRange correlation_range = CorrelationRange::NearestNeighbor;
  /// Electrons per site; 1.0 is half filling for spin-1/2 fermions.
  double filling = 1.0;
  ModeLayout mode_layout = ModeLayout::PerSite;
};

/// Bonds (i, j), i < j, of a one-dimensional chain. Two sites always use the open convention.
inline std::vector<std::pair<int, int>> chain_bonds(int n_sites, Boundary boundary) {
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < n_sites; ++i) bonds.emplace_back(i, i + 1);
  if (boundary == Boundary::Periodic && n_sites > 2) bonds.emplace_back(0, n_sites - 1);
  return bonds;
}

/// One-dimensional Hubbard-Holstein-type model.
///
///   H = -t sum_<ij> c^dag_i c_j + correlation + sum_a [omega (b^dag_a b_a + 1/2)
///       + sqrt(omega/2) (g . n)_a (b^dag_a + b_a)]
///
/// Nearest-neighbour correlation is (U/2) sum over ordered bonds (n_i - 1/2)(n_j - 1/2);
/// on-site correlation is U sum_i (n_i,up - 1/2)(n_i,dn - 1/2). The 1/2 shifts are folded
/// into the one-body matrix and a scalar. Per-site modes couple to n_i; the single-cavity
/// layout couples one mode to the centred position operator sum_i (i - (L-1)/2) n_i.
/// No dipole self-energy.
inline ElectronBosonSystem build_hubbard_holstein(const LatticeSpec& spec) {
  if (spec.n_sites < 2) throw ValidationError("lattice needs n_sites >= 2");
  if (!(spec.t > 0.0)) throw ValidationError("hopping t must be positive");
  if (!(spec.omega > 0.0)) throw ValidationError("boson frequency must be positive");
  const double ne = spec.filling * spec.n_sites;
  const int n_electrons = static_cast<int>(std::lround(ne));
  if (std::abs(ne - n_electrons) > 1e-9 || n_electrons < 0 || n_electrons > 2 * spec.n_sites)
    throw ValidationError("filling does not give an admissible integer electron count");

  const int L = spec.n_sites;
  ElectronBosonSystem sys;
  sys.n_orbitals = L;
  sys.n_electrons = n_electrons;
  sys.h = Matrix::Zero(L, L);
  sys.eri = Tensor4(L);
  sys.include_dse = false;
  sys.mode_layout = spec.mode_layout;

  const auto bonds = chain_bonds(L, spec.boundary);
  for (auto [i, j] : bonds) {
    sys.h(i, j) -= spec.t;
    sys.h(j, i) -= spec.t;
  }

  if (spec.correlation_range == CorrelationRange::NearestNeighbor) {
    for (auto [i, j] : bonds) {
      sys.eri(i, i, j, j) += spec.U;
      sys.eri(j, j, i, i) += spec.U;
      sys.h(i, i) -= 0.5 * spec.U;
      sys.h(j, j) -= 0.5 * spec.U;
      sys.e_core += 0.25 * spec.U;
    }
  } else {
    for (int i = 0; i < L; ++i) {
      sys.eri(i, i, i, i) += spec.U;
      sys.h(i, i) -= 0.5 * spec.U;
      sys.e_core += 0.25 * spec.U;
    }
  }

  if (spec.mode_layout == ModeLayout::PerSite) {
    for (int i = 0; i < L; ++i) {
      BosonMode m;
      m.omega = spec.omega;
      m.lambda = spec.g;
      m.coupling = Matrix::Zero(L, L);
      m.coupling(i, i) = spec.g;
      sys.modes.push_back(std::move(m));
    }
  } else {
    BosonMode m;
    m.omega = spec.omega;
    m.lambda = spec.g;
    m.coupling = Matrix::Zero(L, L);
    for (int i = 0; i < L; ++i) m.coupling(i, i) = spec.g * (i - 0.5 * (L - 1));
    sys.modes.push_back(std::move(m));
  }
  return sys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string tok, double& out) {
  std::replace(tok.begin(), tok.end(), 'D', 'E');
  std::replace(tok.begin(), tok.end(), 'd', 'e');
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline bool parse_int(const std::string& tok, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

/// Read an FCIDUMP file: a namelist header carrying NORB/NELEC/MS2, then lines
/// "value i j k l" (1-based). i j k l > 0 is (ij|kl), k = l = 0 is h_ij, all zero is the core
/// energy. The returned system has no boson modes.
inline ElectronBosonSystem load_fcidump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open FCIDUMP file " + path);

  std::string line, header;
  int lineno = 0;
  bool header_done = false;
  while (!header_done && std::getline(in, line)) {
    ++lineno;
    std::string upper = line;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    // The namelist closes with "&END" or a lone "/".
    const auto stop = std::min(upper.find("&END"), upper.find('/'));
    header += upper.substr(0, stop) + " ";
    header_done = stop != std::string::npos;
  }
  if (!header_done) throw ParseError(path, lineno, "unterminated FCIDUMP header");

  // KEY=value pairs; a value runs up to the next KEY=.
  std::map<std::string, std::string> keys;
  {
    const std::regex key_re(R"(([A-Z_][A-Z0-9_]*)\s*=)");
    std::string body = header;
    if (auto p = body.find("&FCI"); p != std::string::npos) body = body.substr(p + 4);
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> found;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), key_re); it != std::sregex_iterator(); ++it)
      found.push_back({(*it)[1].str(), {static_cast<std::size_t>(it->position(0)),
                                        static_cast<std::size_t>(it->position(0) + it->length(0))}});
    for (std::size_t k = 0; k < found.size(); ++k) {
      const std::size_t vbeg = found[k].second.second;
      const std::size_t vend = k + 1 < found.size() ? found[k + 1].second.first : body.size();
      keys[found[k].first] = detail::trim(body.substr(vbeg, vend - vbeg));
    }
  }

  auto header_int = [&](const std::string& key, int& out) {
    auto it = keys.find(key);
    if (it == keys.end()) return false;
    std::string v = it->second;
    v.erase(std::remove(v.begin(), v.end(), ','), v.end());
    if (!detail::parse_int(detail::trim(v), out))
      throw ParseError(path, 1, "malformed header value for " + key);
    return true;
  };

  int norb = 0, nelec = 0, ms2 = 0;
  if (!header_int("NORB", norb) || norb <= 0) throw ParseError(path, 1, "header lacks a positive NORB");
  if (!header_int("NELEC", nelec)) throw ParseError(path, 1, "header lacks NELEC");
  header_int("MS2", ms2);
  if (ms2 != 0) throw ValidationError("only closed-shell (MS2=0) integrals are supported");

  ElectronBosonSystem sys;
  sys.n_orbitals = norb;
  sys.n_electrons = nelec;
  sys.h = Matrix::Zero(norb, norb);
  sys.eri = Tensor4(norb);

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    std::stringstream ss(t);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    double value = 0.0;
    int idx[4];
    bool ok = tok.size() == 5 && detail::parse_double(tok[0], value);
    for (int k = 0; ok && k < 4; ++k) ok = detail::parse_int(tok[k + 1], idx[k]);
    if (!ok) throw ParseError(path, lineno, "expected 'value i j k l', got '" + t + "'");
    for (int k = 0; k < 4; ++k)
      if (idx[k] < 0 || idx[k] > norb)
        throw ParseError(path, lineno, "orbital index " + std::to_string(idx[k]) + " inconsistent with NORB=" +
                                           std::to_string(norb));
    const int i = idx[0], j = idx[1], k = idx[2], l = idx[3];
    if (i > 0 && j > 0 && k > 0 && l > 0) {
      sys.eri.set_symmetric(i - 1, j - 1, k - 1, l - 1, value);
    } else if (i > 0 && j > 0 && k == 0 && l == 0) {
      sys.h(i - 1, j - 1) = value;
      sys.h(j - 1, i - 1) = value;
    } else if (i == 0 && j == 0 && k == 0 && l == 0) {
      sys.e_core = value;
    } else if (i > 0 && j == 0 && k == 0 && l == 0) {
      // orbital energies: not needed
    } else {
      throw ParseError(path, lineno, "unsupported index pattern '" + t + "'");
    }
  }
  if (nelec < 0 || nelec > 2 * norb) throw ParseError(path, 1, "NELEC inconsistent with NORB");
  return sys;
}

/// Read a dipole file: header "n_orbitals n_modes", then n_modes row-major n x n matrices
/// of the polarization-projected dipole operator e_a . D.
inline std::vector<Matrix> load_dipole_matrices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dipole file " + path);
  std::string line;
  int lineno = 0;
  int n = 0, nm = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra) || !detail::parse_int(a, n) || !detail::parse_int(b, nm) || n <= 0 ||
        nm <= 0)
      throw ParseError(path, lineno, "expected header 'n_orbitals n_modes'");
    break;
  }
  if (n == 0) throw ParseError(path, lineno, "empty dipole file");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * n * nm);
  while (std::getline(in, line)) {
    ++lineno;
    std::stringstream ss(line);
    for (std::string tok; ss >> tok;) {
      double v = 0.0;
      if (!detail::parse_double(tok, v)) throw ParseError(path, lineno, "malformed number '" + tok + "'");
      values.push_back(v);
    }
  }
  if (values.size() != static_cast<std::size_t>(n) * n * nm)
    throw ParseError(path, lineno, "expected " + std::to_string(n * n * nm) + " matrix elements, found " +
                                       std::to_string(values.size()));
  std::vector<Matrix> out;
  for (int m = 0; m < nm; ++m) {
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = values[(static_cast<std::size_t>(m) * n + i) * n + j];
    if (hermiticity_defect(d) > 1e-10) throw ValidationError("dipole matrix " + std::to_string(m) + " is not Hermitian");
    out.push_back(0.5 * (d + d.transpose()));
  }
  return out;
}

struct ModeSpec {
  double omega = 1.0;
  double lambda = 0.0;
};

/// Attach cavity modes: mode a couples through lambda_a * dipoles[a].
inline ElectronBosonSystem with_cavity_modes(ElectronBosonSystem sys, const std::vector<Matrix>& dipoles,
                                             const std::vector<ModeSpec>& modes, bool include_dse) {
  if (dipoles.size() != modes.size())
    throw ValidationError("number of dipole matrices does not match the mode list");
  sys.modes.clear();
  for (std::size_t a = 0; a < modes.size(); ++a) {
    if (dipoles[a].rows() != sys.n_orbitals) throw ValidationError("dipole matrix inconsistent with NORB");
    BosonMode m;
    m.omega = modes[a].omega;
    m.lambda = modes[a].lambda;
    m.coupling = modes[a].lambda * dipoles[a];
    sys.modes.push_back(std::move(m));
  }
  sys.include_dse = include_dse;
  sys.mode_layout = ModeLayout::SingleCavity;
  sys.validate();
  return sys;
}

struct DipoleEigenbasis {
  Vector values;    ///< ascending
  Matrix rotation;  ///< columns are eigenvectors; A^T (lambda . D) A = diag(values)
};

/// Eigenbasis of a Hermitian coupling matrix, ascending, with the sign convention of
/// `symmetric_eigen`.
inline DipoleEigenbasis dipole_eigenbasis(const Matrix& coupling) {
  require_square(coupling, "coupling matrix");
  if (hermiticity_defect(coupling) > 1e-10) throw ValidationError("coupling matrix is not Hermitian");
  auto es = symmetric_eigen(coupling);
  return {es.values, es.vectors};
}

/// Common eigenbasis of all coupling matrices: `rotation` A and per-mode eigenvalues g_{a,p}.
struct CommonDipoleBasis {
  Matrix rotation;
  std::vector<Vector> eigenvalues;
};

inline CommonDipoleBasis common_dipole_basis(const ElectronBosonSystem& sys) {
  const int n = sys.n_orbitals;
  CommonDipoleBasis out;
  bool all_diagonal = true;
  for (const auto& m : sys.modes) {
    Matrix off = m.coupling;
    off.diagonal().setZero();
    if (max_abs(off) > 1e-14) all_diagonal = false;
  }
  if (all_diagonal) {
    out.rotation = Matrix::Identity(n, n);
  } else if (sys.n_modes() == 1) {
    out.rotation = dipole_eigenbasis(sys.modes[0].coupling).rotation;
  } else {
    // A generic combination separates the joint eigenspaces.
    Matrix mix = Matrix::Zero(n, n);
    for (int a = 0; a < sys.n_modes(); ++a) mix += (1.0 + 0.6180339887 * a + 0.1 * a * a) * sys.modes[a].coupling;
    out.rotation = dipole_eigenbasis(mix).rotation;
  }
  for (const auto& m : sys.modes) {
    Matrix d = out.rotation.transpose() * m.coupling * out.rotation;
    Matrix off = d;
    off.diagonal().setZero();
    if (max_abs(off) > 1e-9 * std::max(1.0, max_abs(d)))
      throw ValidationError("coupling matrices do not share a common eigenbasis");
    out.eigenvalues.push_back(d.diagonal());
  }
  return out;
}

/// Correlation renormalized by the polaron shift: U - g^2 f (2 - f).
inline double effective_correlation(double U, double g, double f) { return U - g * g * f * (2.0 - f); }

}  // namespace vsq
