#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "vsq/config.hpp"
#include "vsq/entanglement.hpp"
#include "vsq/oracle.hpp"
#include "vsq/scf.hpp"

namespace vsq {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One output row: one ansatz at one grid point.
struct RunRow {
  int point = 0;
  std::string parameter;
  double value = kNaN;
  AnsatzKind ansatz = AnsatzKind::HF_bare;
  std::string status = "ok";
  bool converged = false;
  int iterations = 0;
  double gradient_norm = kNaN;
  EnergyDecomposition energy;
  VariationalParams params;
  double e_ref = kNaN;   ///< reference ansatz, free optimization
  double e_free = kNaN;  ///< same ansatz, all parameters free (frozen-parameter scans only)
  double s_mf = kNaN;
  double s_ed = kNaN;
  double e_ed = kNaN;
  std::string ed_status;
};

namespace detail {

inline bool is_frozen_param(const std::string& p) { return p == "f" || p == "r" || p == "z"; }

inline SCFResult solve_frozen(const DipoleFrame& fr, AnsatzKind kind, const std::string& param, double value,
                              const SCFOptions& opt) {
  auto pts = scan_parameter(fr, kind, param, {value}, opt);
  if (pts[0].status.rfind("error", 0) == 0) throw Error(pts[0].status.substr(7));
  return pts[0].result;
}

/// Rows of one grid point. `fixed` holds per-ansatz free energies computed once for
/// frozen-parameter scans (the system does not change along such a sweep).
inline std::vector<RunRow> solve_point(const RunConfig& c, int point, const std::map<AnsatzKind, double>& fixed) {
  std::vector<RunRow> rows;
  const bool swept = c.sweep.has_value();
  const std::string param = swept ? c.sweep->parameter : std::string();
  const double value = swept ? c.sweep->grid[point] : kNaN;
  const bool frozen = swept && is_frozen_param(param);

  auto fail_all = [&](const std::string& msg) {
    for (AnsatzKind k : c.ansatze) {
      RunRow r;
      r.point = point;
      r.parameter = param;
      r.value = value;
      r.ansatz = k;
      r.status = "error: " + msg;
      rows.push_back(std::move(r));
    }
    return rows;
  };

  ElectronBosonSystem sys;
  try {
    sys = build_system(c, frozen ? std::string() : param, value);
  } catch (const Error& e) {
    return fail_all(e.what());
  }
  const DipoleFrame fr = DipoleFrame::from(sys);

  double e_ed = kNaN, s_ed = kNaN;
  std::string ed_status;
  if (c.oracle.enable) {
    try {
      EDOptions o;
      o.n_max = c.oracle.n_max;
      o.recheck_increment = c.oracle.recheck;
      const EDResult ed = solve_exact(sys, o);
      e_ed = ed.energy;
      s_ed = ed.mean_entropy;
      ed_status = ed.truncation_converged ? "ok" : "truncation_unconverged";
    } catch (const Error& e) {
      ed_status = std::string("error: ") + e.what();
    }
  }

  double e_ref = kNaN;
  if (c.reference) {
    if (frozen) {
      e_ref = fixed.at(*c.reference);
    } else {
      try {
        const SCFResult ref = scf_solve(fr, *c.reference, c.solver);
        if (ref.converged) e_ref = ref.energy.total;
      } catch (const Error&) {
      }
    }
  }

  for (AnsatzKind k : c.ansatze) {
    RunRow r;
    r.point = point;
    r.parameter = param;
    r.value = value;
    r.ansatz = k;
    r.e_ref = e_ref;
    r.e_ed = e_ed;
    r.s_ed = s_ed;
    r.ed_status = ed_status;
    if (frozen) r.e_free = fixed.at(k);
    try {
      const SCFResult res = frozen ? solve_frozen(fr, k, param, value, c.solver) : scf_solve(fr, k, c.solver);
      r.converged = res.converged;
      r.iterations = res.macro_iterations;
      r.gradient_norm = res.gradient_norm;
      r.energy = res.energy;
      r.params = res.params;
      r.status = res.converged ? "ok" : "not_converged";
      if (res.converged && c.entropy) r.s_mf = mean_field_entanglement(res, fr).mean_entropy;
    } catch (const Error& e) {
      r.status = std::string("error: ") + e.what();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

/// Run every grid point of `c` on `jobs` workers; rows come back in grid order.
inline std::vector<RunRow> run_config(const RunConfig& c, int jobs = 1) {
  const int n_points = c.sweep ? static_cast<int>(c.sweep->grid.size()) : 1;
  std::map<AnsatzKind, double> fixed;
  if (c.sweep && detail::is_frozen_param(c.sweep->parameter)) {
    const DipoleFrame fr = DipoleFrame::from(build_system(c));
    auto kinds = c.ansatze;
    if (c.reference) kinds.push_back(*c.reference);
    for (AnsatzKind k : kinds) {
      if (fixed.count(k)) continue;
      try {
        const SCFResult res = scf_solve(fr, k, c.solver);
        fixed[k] = res.converged ? res.energy.total : kNaN;
      } catch (const Error&) {
        fixed[k] = kNaN;
      }
    }
  }

  std::vector<std::vector<RunRow>> results(n_points);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_points; i = next++) results[i] = detail::solve_point(c, i, fixed);
  };
  const int n_workers = std::clamp(jobs, 1, n_points);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<RunRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

// ---------------------------------------------------------------------------------------------
// Output.

namespace detail {

inline std::string num(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

inline std::string join_eta(const std::vector<Vector>& eta) {
  std::string s;
  for (std::size_t a = 0; a < eta.size(); ++a) {
    if (a) s += "|";
    s += join(std::vector<double>(eta[a].data(), eta[a].data() + eta[a].size()));
  }
  return s;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline nlohmann::json jnum(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace detail

inline const char* kCsvHeader =
    "config_hash,point,parameter,value,ansatz,status,converged,iterations,gradient_norm,E_total,E_one_body,"
    "E_two_body,E_electronic,E_residual,E_photon,E_constant,E_ref,dE_ref,E_free,dE_free,f,r,z,eta,S_mf,S_ed,E_ed,"
    "ed_status";

inline void write_csv(std::ostream& os, const std::vector<RunRow>& rows, const std::string& hash) {
  using namespace detail;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& e = r.energy;
    const bool ok = r.status == "ok" || r.status == "not_converged";
    auto en = [&](double x) { return ok ? num(x) : std::string("nan"); };
    os << hash << ',' << r.point << ',' << csv_field(r.parameter) << ',' << num(r.value) << ','
       << ansatz_name(r.ansatz) << ',' << csv_field(r.status) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations
       << ',' << num(r.gradient_norm) << ',' << en(e.total) << ',' << en(e.one_body) << ',' << en(e.two_body) << ','
       << en(e.electronic) << ',' << en(e.residual) << ',' << en(e.photon) << ',' << en(e.constant) << ','
       << num(r.e_ref) << ',' << (ok ? num(e.total - r.e_ref) : "nan") << ',' << num(r.e_free) << ','
       << (ok ? num(r.e_free - e.total) : "nan") << ',' << join(r.params.f) << ',' << join(r.params.r) << ','
       << join(r.params.z) << ',' << join_eta(r.params.eta) << ',' << num(r.s_mf) << ',' << num(r.s_ed) << ','
       << num(r.e_ed) << ',' << csv_field(r.ed_status) << '\n';
  }
}

inline void write_jsonl(std::ostream& os, const std::vector<RunRow>& rows, const std::string& hash) {
  using detail::jnum;
  for (const auto& r : rows) {
    const auto& e = r.energy;
    const bool ok = r.status == "ok" || r.status == "not_converged";
    nlohmann::json j;
    j["config_hash"] = hash;
    j["point"] = r.point;
    j["parameter"] = r.parameter;
    j["value"] = jnum(r.value);
    j["ansatz"] = ansatz_name(r.ansatz);
    j["status"] = r.status;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["gradient_norm"] = jnum(r.gradient_norm);
    j["energy"] = ok ? nlohmann::json{{"total", e.total},         {"one_body", e.one_body},
                                      {"two_body", e.two_body},   {"electronic", e.electronic},
                                      {"residual", e.residual},   {"photon", e.photon},
                                      {"constant", e.constant}}
                     : nlohmann::json(nullptr);
    j["E_ref"] = jnum(r.e_ref);
    j["dE_ref"] = ok ? jnum(e.total - r.e_ref) : nlohmann::json(nullptr);
    j["E_free"] = jnum(r.e_free);
    j["dE_free"] = ok ? jnum(r.e_free - e.total) : nlohmann::json(nullptr);
    j["f"] = r.params.f;
    j["r"] = r.params.r;
    j["z"] = r.params.z;
    nlohmann::json eta = nlohmann::json::array();
    for (const auto& v : r.params.eta) eta.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    j["eta"] = eta;
    j["S_mf"] = jnum(r.s_mf);
    j["S_ed"] = jnum(r.s_ed);
    j["E_ed"] = jnum(r.e_ed);
    j["ed_status"] = r.ed_status;
    os << j.dump() << '\n';
  }
}

/// 0 when at least one row succeeded, 1 when every row failed.
inline int run_exit_code(const std::vector<RunRow>& rows) {
  for (const auto& r : rows)
    if (r.status == "ok") return 0;
  return 1;
}

}  // namespace vsq
