#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "vsq/model.hpp"

#ifndef VSQ_DEFAULT_FIXTURE_DIR
#define VSQ_DEFAULT_FIXTURE_DIR "fixtures"
#endif

namespace vsq {

/// Directory holding the bundled integral files: $VSQ_FIXTURE_DIR, else the build-time default.
inline std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("VSQ_FIXTURE_DIR"); env && *env) return env;
  return VSQ_DEFAULT_FIXTURE_DIR;
}

/// Absolute paths are returned unchanged; relative ones are looked up in `base` and then in
/// the fixture directory.
inline std::filesystem::path resolve_data_path(const std::string& name, const std::filesystem::path& base = {}) {
  const std::filesystem::path p(name);
  if (p.is_absolute()) return p;
  if (!base.empty() && std::filesystem::exists(base / p)) return base / p;
  if (std::filesystem::exists(fixture_dir() / p)) return fixture_dir() / p;
  if (std::filesystem::exists(p)) return p;
  throw ValidationError("data file '" + name + "' not found (set VSQ_FIXTURE_DIR)");
}

/// Four-site open chain at half filling with on-site correlation and one Holstein mode per site.
inline LatticeSpec hubbard_holstein_fixture(double g = 1.0, double omega = 1.0, double U = 1.0, int n_sites = 4) {
  LatticeSpec s;
  s.n_sites = n_sites;
  s.t = 1.0;
  s.U = U;
  s.g = g;
  s.omega = omega;
  s.boundary = Boundary::Open;
  s.correlation_range = CorrelationRange::OnSite;
  s.filling = 1.0;
  s.mode_layout = ModeLayout::PerSite;
  return s;
}

/// One orbital holding one electron, coupled linearly to one mode without self-energy: a
/// displaced oscillator with ground energy omega/2 - g^2/2.
inline ElectronBosonSystem displaced_oscillator(double g, double omega = 1.0) {
  ElectronBosonSystem sys;
  sys.n_orbitals = 1;
  sys.n_electrons = 1;
  sys.h = Matrix::Zero(1, 1);
  sys.eri = Tensor4(1);
  sys.modes.push_back({omega, g, Matrix::Constant(1, 1, g)});
  sys.include_dse = false;
  return sys;
}

/// Bundled molecule `name` (h2_sto3g, lih_sto3g, h2o_sto3g) in one cavity mode.
inline ElectronBosonSystem molecular_fixture(const std::string& name, double lambda, double omega,
                                             bool include_dse = true) {
  const auto dir = fixture_dir();
  const auto sys = load_fcidump((dir / (name + ".fcidump")).string());
  const auto dip = load_dipole_matrices((dir / (name + ".dipole")).string());
  return with_cavity_modes(sys, {dip.at(0)}, {{omega, lambda}}, include_dse);
}

}  // namespace vsq
