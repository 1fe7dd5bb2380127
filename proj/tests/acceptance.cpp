#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "vsq/vsq.hpp"

using namespace vsq;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EDResult exact(const ElectronBosonSystem& sys, int n_max) {
  EDOptions o;
  o.n_max = n_max;
  o.recheck_increment = 0;
  return solve_exact(sys, o);
}

struct NamedSystem {
  std::string label;
  ElectronBosonSystem sys;
};

std::vector<NamedSystem> all_fixtures() {
  return {{"4-site HH", build_hubbard_holstein(hubbard_holstein_fixture())},
          {"2-site cavity", verification_lattice()},
          {"H2", molecular_fixture("h2_sto3g", 0.3, 0.5)},
          {"LiH", molecular_fixture("lih_sto3g", 0.1, 0.5)},
          {"H2O", molecular_fixture("h2o_sto3g", 0.1, 0.05)}};
}

Outcome reduction_identity() {
  Outcome o;
  double worst = 0.0;
  for (const auto& [label, sys] : all_fixtures()) {
    const DipoleFrame fr = DipoleFrame::from(sys);
    const auto pt = scan_parameter(fr, AnsatzKind::GSS, "r", {0.0});
    const double e_vt = scf_solve(fr, AnsatzKind::VT).energy.total;
    const double gap = std::abs(pt[0].energy - e_vt);
    worst = std::max(worst, gap);
    o.details.push_back(fmt("%-14s E_GSS(r=0) = %.12f  E_VT = %.12f  gap %.2e", label.c_str(), pt[0].energy, e_vt, gap));
  }
  o.pass = worst < 1e-10;
  o.summary = fmt("max |E_GSS(r=0) - E_VT| = %.2e (tol 1e-10)", worst);
  return o;
}

Outcome variational_ordering() {
  Outcome o;
  const double slack = 1e-9;
  int violations = 0;
  double worst = -1e300;
  for (double g : {0.25, 0.5, 1.0})
    for (double w : {0.5, 1.0, 2.0})
      for (double U : {0.0, 1.0, 4.0}) {
        const auto sys = build_hubbard_holstein(hubbard_holstein_fixture(g, w, U));
        const DipoleFrame fr = DipoleFrame::from(sys);
        const double cs = scf_solve(fr, AnsatzKind::CS).energy.total;
        const double vt = scf_solve(fr, AnsatzKind::VT).energy.total;
        const double gss = scf_solve(fr, AnsatzKind::GSS).energy.total;
        const double ed = exact(sys, 10).energy;
        const double margin = std::max({ed - gss, gss - vt, vt - cs});
        worst = std::max(worst, margin);
        const bool ok = margin <= slack;
        violations += !ok;
        o.details.push_back(fmt("g=%.2f w=%.1f U=%.0f  ED %.9f  GSS %.9f  VT %.9f  CS %.9f %s", g, w, U, ed, gss, vt, cs,
                                ok ? "" : "VIOLATION"));
      }
  o.pass = violations == 0;
  o.summary = fmt("27 grid points, %d violations, largest step %.2e (slack 1e-9)", violations, worst);
  return o;
}

Outcome spectrum_invariance() {
  Outcome o;
  o.pass = true;
  for (const auto& [sys, label] :
       {std::pair{verification_lattice(), "2-site lattice"}, {molecular_fixture("h2_sto3g", 0.3, 0.5), "H2"}}) {
    const auto c = check_spectrum_invariance(sys, label, 30, 5, 101);
    o.pass = o.pass && c.pass;
    o.details.push_back(fmt("%s: %.2e (%s)", c.name.c_str(), c.measured, c.detail.c_str()));
  }
  o.summary = "lowest 10 eigenvalues at n_max 30, 5 points per ansatz, tol 1e-7";
  return o;
}

Outcome scs_rotation() {
  Outcome o;
  o.pass = true;
  double worst = 0.0;
  for (const auto& [sys, label] :
       {std::pair{verification_lattice(), "2-site lattice"}, {molecular_fixture("h2_sto3g", 0.3, 0.5), "H2"}}) {
    const auto c = check_scs_rotation(sys, label, 30, 10, 103);
    o.pass = o.pass && c.pass;
    worst = std::max(worst, c.measured);
    o.details.push_back(fmt("%s: %.2e", c.name.c_str(), c.measured));
  }
  o.summary = fmt("max element-wise gap %.2e at 10 random (z, r) (tol 1e-9)", worst);
  return o;
}

Outcome css_neutrality() {
  Outcome o;
  o.pass = true;
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(1e-3 * i);
  const std::vector<NamedSystem> systems = {{"2-site cavity U=0", [] {
                                               LatticeSpec s = hubbard_holstein_fixture(1.0, 1.0, 0.0, 2);
                                               s.mode_layout = ModeLayout::SingleCavity;
                                               return build_hubbard_holstein(s);
                                             }()},
                                            {"2-site cavity U=1", verification_lattice()},
                                            {"H2", molecular_fixture("h2_sto3g", 0.3, 0.5)}};
  for (const auto& [label, sys] : systems) {
    const DipoleFrame fr = DipoleFrame::from(sys);
    const auto pts = scan_parameter(fr, AnsatzKind::CSS, "r", grid);
    const auto best =
        std::min_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    const double cs = scf_solve(fr, AnsatzKind::CS).energy.total;
    const bool ok = std::abs(best->value) <= 1e-3 + 1e-12 && std::abs(best->energy - cs) < 1e-9;
    o.pass = o.pass && ok;
    o.details.push_back(fmt("%-18s argmin r = %+.3f  min E %.12f  E_CS %.12f  gap %.2e", label.c_str(), best->value,
                            best->energy, cs, std::abs(best->energy - cs)));
  }
  o.summary = "argmin_r E_CSS within 1e-3 of 0 and equal to E_CS within 1e-9 on 3 fixtures";
  return o;
}

Outcome gradient_suite() {
  Outcome o;
  o.pass = true;
  double worst = 0.0;
  for (const auto& [label, sys] : all_fixtures()) {
    const auto rep = gradient_deviation(sys, 20, 107);
    const double m = std::max({rep.r, rep.f, rep.z, rep.eta, rep.fock});
    worst = std::max(worst, m);
    o.pass = o.pass && m < 1e-6;
    o.details.push_back(fmt("%-14s r %.1e  f %.1e  z %.1e  eta %.1e  Fock %.1e", label.c_str(), rep.r, rep.f, rep.z,
                            rep.eta, rep.fock));
  }
  o.summary = fmt("max relative deviation %.2e over 20 points per fixture (tol 1e-6)", worst);
  return o;
}

Outcome coupling_growth() {
  Outcome o;
  std::vector<double> diff;
  for (double lambda : {0.05, 0.1, 0.2, 0.4}) {
    const DipoleFrame fr = DipoleFrame::from(molecular_fixture("h2o_sto3g", lambda, 0.05));
    const double vt = scf_solve(fr, AnsatzKind::VT).energy.total;
    const double gss = scf_solve(fr, AnsatzKind::GSS).energy.total;
    diff.push_back(vt - gss);
    o.details.push_back(fmt("lambda=%.2f  E_VT %.12f  E_GSS %.12f  E_VT-E_GSS %.3e", lambda, vt, gss, vt - gss));
  }
  o.pass = diff[0] >= 0.0;
  for (std::size_t i = 1; i < diff.size(); ++i) o.pass = o.pass && diff[i] >= diff[i - 1] - 1e-10;
  o.summary = fmt("H2O, omega 0.05: E_VT - E_GSS = %.2e, %.2e, %.2e, %.2e", diff[0], diff[1], diff[2], diff[3]);
  return o;
}

struct EntropyCurve {
  std::vector<double> x, mf, ed;
};

bool non_decreasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - tol) return false;
  return true;
}

std::size_t argmax(const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); }

bool single_interior_maximum(const std::vector<double>& v) {
  const std::size_t m = argmax(v);
  if (m == 0 || m + 1 == v.size()) return false;
  for (std::size_t i = 1; i <= m; ++i)
    if (v[i] < v[i - 1]) return false;
  for (std::size_t i = m + 1; i < v.size(); ++i)
    if (v[i] >= v[i - 1]) return false;
  return true;
}

/// R^2 of log S = c - 2 log U over the last four points, with c fitted; NaN for a flat tail.
double inverse_square_r2(const std::vector<double>& U, const std::vector<double>& S) {
  const std::size_t n = U.size(), k = 4;
  std::vector<double> y;
  for (std::size_t i = n - k; i < n; ++i) {
    if (!(S[i] > 0.0) || !(U[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    y.push_back(std::log(S[i]));
  }
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i) c += y[i] + 2.0 * std::log(U[n - k + i]);
  c /= k;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double fit = c - 2.0 * std::log(U[n - k + i]);
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot < 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - ss_res / ss_tot;
}

EntropyCurve entropy_curve(const std::vector<double>& grid, const std::function<LatticeSpec(double)>& spec) {
  EntropyCurve c;
  c.x = grid;
  for (double x : grid) {
    const auto sys = build_hubbard_holstein(spec(x));
    const DipoleFrame fr = DipoleFrame::from(sys);
    c.mf.push_back(mean_field_entanglement(scf_solve(fr, AnsatzKind::GSS), fr).mean_entropy);
    c.ed.push_back(exact(sys, 10).mean_entropy);
  }
  return c;
}

bool within_factor_two(const EntropyCurve& c) {
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    const double a = c.mf[i], b = c.ed[i];
    if (a < 1e-12 && b < 1e-12) continue;
    if (!(a <= 2.0 * b && b <= 2.0 * a)) return false;
  }
  return true;
}

Outcome entropy_physics() {
  Outcome o;
  const auto g_curve = entropy_curve({0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5},
                                     [](double g) { return hubbard_holstein_fixture(g, 1.0, 1.0); });
  const auto u_curve = entropy_curve({0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0},
                                     [](double U) { return hubbard_holstein_fixture(1.0, 1.0, U); });
  for (const auto& [name, c] : {std::pair{"g", &g_curve}, {"U", &u_curve}})
    for (std::size_t i = 0; i < c->x.size(); ++i)
      o.details.push_back(fmt("%s=%5.2f  S_MF %.5f  S_ED %.5f", name, c->x[i], c->mf[i], c->ed[i]));

  const bool a_mf = non_decreasing(g_curve.mf, 1e-10), a_ed = non_decreasing(g_curve.ed, 1e-10);
  const bool b_shape_mf = single_interior_maximum(u_curve.mf), b_shape_ed = single_interior_maximum(u_curve.ed);
  const double r2_mf = inverse_square_r2(u_curve.x, u_curve.mf), r2_ed = inverse_square_r2(u_curve.x, u_curve.ed);
  const bool b = b_shape_mf && b_shape_ed && r2_mf > 0.9 && r2_ed > 0.9;
  const bool c_factor = within_factor_two(g_curve) && within_factor_two(u_curve);
  const auto turn = [](const EntropyCurve& c) {
    return std::abs(static_cast<long>(argmax(c.mf)) - static_cast<long>(argmax(c.ed))) <= 1;
  };
  const bool c_turn = turn(g_curve) && turn(u_curve);

  o.details.push_back(fmt("(a) S(g) non-decreasing: mean field %s, ED %s", a_mf ? "yes" : "no", a_ed ? "yes" : "no"));
  o.details.push_back(fmt("(b) S(U) single interior maximum: mean field %s, ED %s; U^-2 tail R^2: mean field %.3f, ED %.3f",
                          b_shape_mf ? "yes" : "no", b_shape_ed ? "yes" : "no", r2_mf, r2_ed));
  o.details.push_back(fmt("(c) within factor 2: %s; turn-over within one grid step: %s (argmax U: MF %zu, ED %zu)",
                          c_factor ? "yes" : "no", c_turn ? "yes" : "no", argmax(u_curve.mf), argmax(u_curve.ed)));
  o.pass = a_mf && a_ed && b && c_factor && c_turn;
  o.summary = fmt("(a) %s  (b) %s  (c) %s", a_mf && a_ed ? "pass" : "fail", b ? "pass" : "fail",
                  c_factor && c_turn ? "pass" : "fail");
  return o;
}

Outcome displaced_oscillator_exactness() {
  Outcome o;
  double worst = 0.0;
  for (double g : {0.1, 1.0, 3.0}) {
    const double e = exact(displaced_oscillator(g), 80).energy;
    const double ref = -g * g / 2.0 + 0.5;
    worst = std::max(worst, std::abs(e - ref));
    o.details.push_back(fmt("g=%.1f  E_ED %.15f  -g^2/2 + w/2 = %.15f", g, e, ref));
  }
  o.pass = worst < 1e-9;
  o.summary = fmt("max |E_ED - (-g^2/2 + w/2)| = %.2e (tol 1e-9)", worst);
  return o;
}

Outcome entropy_routes() {
  const auto c = check_entropy_routes(50, 109);
  return {c.pass, fmt("max |S_Fock - S_Gram| = %.2e over 50 branch sets (tol 1e-8)", c.measured), {}};
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "reduction identity GSS(r=0) = VT", 10, reduction_identity},
    {2, "variational ordering ED <= GSS <= VT <= CS", 300, variational_ordering},
    {3, "spectrum invariance of dressed Hamiltonians", 120, spectrum_invariance},
    {4, "SCS rotation equivalence", 0, scs_rotation},
    {5, "CSS vacuum-limit neutrality", 0, css_neutrality},
    {6, "analytic gradients vs finite differences", 0, gradient_suite},
    {7, "energy gain grows with coupling", 0, coupling_growth},
    {8, "entropy physics on the Hubbard-Holstein chain", 900, entropy_physics},
    {9, "displaced-oscillator exactness", 0, displaced_oscillator_exactness},
    {10, "entropy dual-route consistency", 0, entropy_routes},
};

bool run(const Criterion& c, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("error: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = c.limit_s <= 0 || secs < c.limit_s;
  if (verbose)
    for (const auto& d : o.details) std::cout << "  " << d << '\n';
  const bool pass = o.pass && in_time;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.summary
            << fmt(" [%.1f s", secs) << (c.limit_s > 0 ? fmt(", limit %.0f s]", c.limit_s) : std::string("]")) << '\n'
            << std::flush;
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria, one PASS/FAIL line each"};
  int only = 0;
  bool quiet = false;
  app.add_option("--criterion,-c", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_flag("--quiet,-q", quiet, "Omit per-point detail lines");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (const auto& c : kCriteria)
    if (only == 0 || c.id == only) all = run(c, !quiet) && all;
  return all ? 0 : 1;
}
