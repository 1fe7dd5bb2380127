#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vsq/error.hpp"
#include "vsq/fixtures.hpp"
#include "vsq/model.hpp"
#include "vsq/scf.hpp"
#include "vsq/transforms.hpp"

namespace vsq {

inline constexpr int kConfigVersion = 1;

struct MoleculeSource {
  std::string fcidump;
  std::string dipole;
  std::vector<ModeSpec> modes;
  bool include_dse = true;
};

struct SweepSpec {
  std::string parameter;  ///< g, U, t, omega, lambda (system) or f, r, z (frozen variational)
  std::vector<double> grid;
};

struct OracleSpec {
  bool enable = false;
  int n_max = 10;
  int recheck = 4;
};

struct OutputSpec {
  std::string path;  ///< empty: standard output
  std::string format = "csv";
};

struct RunConfig {
  int version = kConfigVersion;
  std::optional<LatticeSpec> lattice;
  std::optional<MoleculeSource> molecule;
  bool include_zero_point = true;
  std::vector<AnsatzKind> ansatze;
  std::optional<AnsatzKind> reference;
  std::optional<SweepSpec> sweep;
  OracleSpec oracle;
  OutputSpec output;
  SCFOptions solver;
  bool entropy = true;
  unsigned seed = 0;
  std::filesystem::path base_dir;
  nlohmann::json source;  ///< the parsed document, used for hashing
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  return j.at(key);
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ValidationError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(what + " has the wrong type");
  }
}

inline double finite_number(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a real number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
  return x;
}

inline LatticeSpec parse_lattice(const nlohmann::json& j) {
  reject_unknown(j, {"n_sites", "t", "U", "g", "omega", "boundary", "correlation_range", "filling", "mode_layout"},
                 "system.lattice");
  LatticeSpec s;
  s.n_sites = get_as<int>(require(j, "n_sites", "system.lattice"), "n_sites");
  if (j.contains("t")) s.t = finite_number(j["t"], "t");
  if (j.contains("U")) s.U = finite_number(j["U"], "U");
  if (j.contains("g")) s.g = finite_number(j["g"], "g");
  if (j.contains("omega")) s.omega = finite_number(j["omega"], "omega");
  if (j.contains("filling")) s.filling = finite_number(j["filling"], "filling");
  const std::string bc = get_as<std::string>(j.value("boundary", nlohmann::json("periodic")), "boundary");
  if (bc == "periodic") s.boundary = Boundary::Periodic;
  else if (bc == "open") s.boundary = Boundary::Open;
  else throw ValidationError("boundary must be 'periodic' or 'open'");
  const std::string cr = get_as<std::string>(j.value("correlation_range", nlohmann::json("nearest-neighbor")),
                                             "correlation_range");
  if (cr == "nearest-neighbor") s.correlation_range = CorrelationRange::NearestNeighbor;
  else if (cr == "on-site") s.correlation_range = CorrelationRange::OnSite;
  else throw ValidationError("correlation_range must be 'on-site' or 'nearest-neighbor'");
  const std::string ml = get_as<std::string>(j.value("mode_layout", nlohmann::json("per-site")), "mode_layout");
  if (ml == "per-site") s.mode_layout = ModeLayout::PerSite;
  else if (ml == "single-cavity") s.mode_layout = ModeLayout::SingleCavity;
  else throw ValidationError("mode_layout must be 'per-site' or 'single-cavity'");
  if (s.n_sites < 2) throw ValidationError("lattice needs n_sites >= 2");
  if (!(s.t > 0.0)) throw ValidationError("hopping t must be positive");
  if (!(s.omega > 0.0)) throw ValidationError("omega must be positive");
  return s;
}

inline MoleculeSource parse_molecule(const nlohmann::json& j) {
  reject_unknown(j, {"fcidump", "dipole", "modes", "include_dse"}, "system.molecule");
  MoleculeSource m;
  m.fcidump = get_as<std::string>(require(j, "fcidump", "system.molecule"), "fcidump");
  m.dipole = get_as<std::string>(require(j, "dipole", "system.molecule"), "dipole");
  const auto& modes = require(j, "modes", "system.molecule");
  if (!modes.is_array() || modes.empty()) throw ValidationError("system.molecule.modes must be a non-empty list");
  for (const auto& mj : modes) {
    reject_unknown(mj, {"omega", "lambda"}, "system.molecule.modes[]");
    ModeSpec s;
    s.omega = finite_number(require(mj, "omega", "mode"), "omega");
    s.lambda = finite_number(require(mj, "lambda", "mode"), "lambda");
    if (!(s.omega > 0.0)) throw ValidationError("omega must be positive");
    m.modes.push_back(s);
  }
  m.include_dse = get_as<bool>(j.value("include_dse", nlohmann::json(true)), "include_dse");
  return m;
}

inline SCFOptions parse_solver(const nlohmann::json& j) {
  reject_unknown(j,
                 {"tol_energy", "tol_gradient", "max_macro", "max_roothaan", "diis_size", "squeeze_cap",
                  "multi_start", "random_starts"},
                 "solver");
  SCFOptions o;
  if (j.contains("tol_energy")) o.tol_energy = finite_number(j["tol_energy"], "tol_energy");
  if (j.contains("tol_gradient")) o.tol_gradient = finite_number(j["tol_gradient"], "tol_gradient");
  if (j.contains("max_macro")) o.max_macro = get_as<int>(j["max_macro"], "max_macro");
  if (j.contains("max_roothaan")) o.max_roothaan = get_as<int>(j["max_roothaan"], "max_roothaan");
  if (j.contains("diis_size")) o.diis_size = get_as<int>(j["diis_size"], "diis_size");
  if (j.contains("squeeze_cap")) o.squeeze_cap = finite_number(j["squeeze_cap"], "squeeze_cap");
  if (j.contains("multi_start")) o.multi_start = get_as<bool>(j["multi_start"], "multi_start");
  if (j.contains("random_starts")) o.random_starts = get_as<int>(j["random_starts"], "random_starts");
  if (!(o.tol_energy > 0.0) || !(o.tol_gradient > 0.0)) throw ValidationError("solver tolerances must be positive");
  if (o.max_macro < 1 || o.max_roothaan < 1) throw ValidationError("iteration limits must be >= 1");
  if (o.random_starts < 0) throw ValidationError("random_starts must be >= 0");
  if (o.squeeze_cap > kDefaultSqueezeCap) warn("squeeze cap raised above " + std::to_string(kDefaultSqueezeCap));
  return o;
}

}  // namespace detail

/// Validate and convert a configuration document. Relative data paths resolve against `base_dir`
/// and then the fixture directory.
inline RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ValidationError("configuration must be a JSON object");
  detail::reject_unknown(j,
                         {"version", "system", "include_zero_point", "ansatz", "reference", "sweep", "oracle",
                          "output", "solver", "entropy", "seed"},
                         "config");
  RunConfig c;
  c.source = j;
  c.base_dir = base_dir;
  c.version = detail::get_as<int>(detail::require(j, "version", "config"), "version");
  if (c.version != kConfigVersion)
    throw ValidationError("unsupported config version " + std::to_string(c.version) + " (expected " +
                          std::to_string(kConfigVersion) + ")");

  const auto& sys = detail::require(j, "system", "config");
  detail::reject_unknown(sys, {"lattice", "molecule"}, "system");
  if (sys.contains("lattice") == sys.contains("molecule"))
    throw ValidationError("system needs exactly one of 'lattice' or 'molecule'");
  if (sys.contains("lattice")) c.lattice = detail::parse_lattice(sys["lattice"]);
  else c.molecule = detail::parse_molecule(sys["molecule"]);
  c.include_zero_point = detail::get_as<bool>(j.value("include_zero_point", nlohmann::json(true)), "include_zero_point");

  const auto& an = detail::require(j, "ansatz", "config");
  if (an.is_string()) c.ansatze.push_back(parse_ansatz(an.get<std::string>()));
  else if (an.is_array() && !an.empty())
    for (const auto& a : an) c.ansatze.push_back(parse_ansatz(detail::get_as<std::string>(a, "ansatz")));
  else throw ValidationError("ansatz must be a name or a non-empty list of names");
  if (j.contains("reference")) c.reference = parse_ansatz(detail::get_as<std::string>(j["reference"], "reference"));

  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    detail::reject_unknown(sw, {"parameter", "grid"}, "sweep");
    SweepSpec s;
    s.parameter = detail::get_as<std::string>(detail::require(sw, "parameter", "sweep"), "sweep.parameter");
    const auto& grid = detail::require(sw, "grid", "sweep");
    if (!grid.is_array() || grid.empty()) throw ValidationError("sweep.grid must be a non-empty list");
    for (const auto& v : grid) s.grid.push_back(detail::finite_number(v, "sweep.grid value"));
    static const std::set<std::string> lattice_params = {"g", "U", "t", "omega"};
    static const std::set<std::string> molecule_params = {"lambda", "omega"};
    static const std::set<std::string> frozen = {"f", "r", "z"};
    const bool ok = frozen.count(s.parameter) ||
                    (c.lattice ? lattice_params.count(s.parameter) : molecule_params.count(s.parameter));
    if (!ok) throw ValidationError("cannot sweep '" + s.parameter + "' for this system");
    if (frozen.count(s.parameter))
      for (AnsatzKind k : c.ansatze) {
        const bool carries = s.parameter == "f" ? has_f(k) : s.parameter == "r" ? has_r(k) : has_z(k);
        if (!carries)
          throw ValidationError(std::string(ansatz_name(k)) + " has no parameter '" + s.parameter + "' to scan");
      }
    c.sweep = s;
  }

  if (j.contains("oracle")) {
    const auto& o = j["oracle"];
    detail::reject_unknown(o, {"enable", "n_max", "recheck"}, "oracle");
    c.oracle.enable = detail::get_as<bool>(o.value("enable", nlohmann::json(true)), "oracle.enable");
    c.oracle.n_max = detail::get_as<int>(o.value("n_max", nlohmann::json(10)), "oracle.n_max");
    c.oracle.recheck = detail::get_as<int>(o.value("recheck", nlohmann::json(4)), "oracle.recheck");
    if (c.oracle.n_max < 1 || c.oracle.recheck < 0) throw ValidationError("oracle n_max >= 1 and recheck >= 0");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    detail::reject_unknown(o, {"path", "format"}, "output");
    c.output.path = detail::get_as<std::string>(o.value("path", nlohmann::json("")), "output.path");
    c.output.format = detail::get_as<std::string>(o.value("format", nlohmann::json("csv")), "output.format");
  }
  if (c.output.format != "csv" && c.output.format != "jsonl")
    throw ValidationError("output.format must be 'csv' or 'jsonl'");
  if (j.contains("solver")) c.solver = detail::parse_solver(j["solver"]);
  c.entropy = detail::get_as<bool>(j.value("entropy", nlohmann::json(true)), "entropy");
  if (j.contains("seed")) {
    const auto s = detail::get_as<long long>(j["seed"], "seed");
    if (s < 0 || s > 0xffffffffLL) throw ValidationError("seed must be a 32-bit unsigned integer");
    c.seed = static_cast<unsigned>(s);
  }
  c.solver.seed = c.seed;
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// 64-bit FNV-1a hash of the canonical (key-sorted, compact) configuration plus the effective seed.
inline std::string config_hash(const RunConfig& c) {
  nlohmann::json j = c.source;
  j["seed"] = c.seed;
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// The electron-boson system of a configuration, with an optional sweep value applied.
inline ElectronBosonSystem build_system(const RunConfig& c, const std::string& param = {}, double value = 0.0) {
  ElectronBosonSystem sys;
  if (c.lattice) {
    LatticeSpec s = *c.lattice;
    if (param == "g") s.g = value;
    else if (param == "U") s.U = value;
    else if (param == "t") s.t = value;
    else if (param == "omega") s.omega = value;
    sys = build_hubbard_holstein(s);
  } else {
    const auto& m = *c.molecule;
    sys = load_fcidump(resolve_data_path(m.fcidump, c.base_dir).string());
    const auto dip = load_dipole_matrices(resolve_data_path(m.dipole, c.base_dir).string());
    auto modes = m.modes;
    for (auto& ms : modes) {
      if (param == "lambda") ms.lambda = value;
      else if (param == "omega") ms.omega = value;
    }
    if (dip.size() != modes.size()) throw ValidationError("dipole file and mode list disagree on the number of modes");
    sys = with_cavity_modes(sys, dip, modes, m.include_dse);
  }
  sys.include_zero_point = c.include_zero_point;
  sys.validate();
  return sys;
}

}  // namespace vsq
