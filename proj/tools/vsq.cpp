#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "vsq/vsq.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string output;
  int jobs = 0;
  std::optional<unsigned> seed;
  std::string format;
};

int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

int cmd_run(const std::string& path, const CommonFlags& flags) {
  vsq::RunConfig cfg;
  try {
    cfg = vsq::load_config(path);
    if (flags.seed) {
      cfg.seed = *flags.seed;
      cfg.solver.seed = *flags.seed;
    }
    if (!flags.format.empty()) cfg.output.format = flags.format;
    if (!flags.output.empty()) cfg.output.path = flags.output;
    // Surface missing data files as configuration errors before any work starts.
    vsq::build_system(cfg);
  } catch (const vsq::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vsq::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto rows = vsq::run_config(cfg, flags.jobs > 0 ? flags.jobs : default_jobs());
  const std::string hash = vsq::config_hash(cfg);
  std::ofstream file;
  if (!cfg.output.path.empty()) {
    file.open(cfg.output.path);
    if (!file) {
      std::cerr << "cannot write " << cfg.output.path << '\n';
      return kExitFailure;
    }
  }
  std::ostream& os = cfg.output.path.empty() ? std::cout : file;
  if (cfg.output.format == "jsonl") vsq::write_jsonl(os, rows, hash);
  else vsq::write_csv(os, rows, hash);
  return vsq::run_exit_code(rows);
}

int cmd_verify(const std::string& path, const CommonFlags& flags, double pair_scale, double grad_offset) {
  std::optional<vsq::RunConfig> cfg;
  std::optional<vsq::ElectronBosonSystem> sys;
  unsigned seed = 0;
  try {
    if (!path.empty()) {
      cfg = vsq::load_config(path);
      seed = cfg->seed;
      sys = vsq::build_system(*cfg);
    }
  } catch (const vsq::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vsq::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (flags.seed) seed = *flags.seed;
  vsq::fault_injection().pair_coefficient_scale = pair_scale;
  vsq::fault_injection().gradient_offset = grad_offset;

  std::vector<vsq::CheckResult> checks;
  try {
    checks = vsq::run_verification_suite(seed);
    if (sys) {
      auto g = vsq::check_gradients(*sys, "config system", 5, seed + 23);
      checks.insert(checks.end(), g.begin(), g.end());
      const vsq::DipoleFrame fr = vsq::DipoleFrame::from(*sys);
      if (fr.n_modes() == 1 && vsq::ProductBasis(fr, 30).size() <= 2000)
        checks.push_back(vsq::check_spectrum_invariance(*sys, "config system", 30, 5, seed + 29));
    }
  } catch (const vsq::Error& e) {
    std::cerr << "verification aborted: " << e.what() << '\n';
    return kExitFailure;
  }

  std::ofstream file;
  if (!flags.output.empty()) file.open(flags.output);
  std::ostream& os = flags.output.empty() ? std::cout : file;
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    if (flags.format == "jsonl") {
      nlohmann::json j{{"check", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"tolerance", c.tolerance}};
      if (!c.detail.empty()) j["detail"] = c.detail;
      os << j.dump() << '\n';
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e (tol %.1e)", c.measured, c.tolerance);
      os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << buf;
      if (!c.detail.empty()) os << " [" << c.detail << "]";
      os << '\n';
    }
  }
  return all ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational squeezed mean-field solver for coupled electron-boson Hamiltonians"};
  app.require_subcommand(1);
  CommonFlags flags;
  double pair_scale = 1.0, grad_offset = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output,-o", flags.output, "Write results to this file instead of stdout");
    sub->add_option("--jobs,-j", flags.jobs, "Worker threads (default: number of cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", flags.seed, "Override the configuration seed");
    sub->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  };

  std::string run_path;
  auto* run = app.add_subcommand("run", "Solve every grid point of a configuration");
  run->add_option("config", run_path, "Configuration file (JSON)")->required();
  add_common(run);

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite and report pass/fail per check");
  verify->add_option("config", verify_path, "Optional configuration whose system is checked as well");
  add_common(verify);
  verify->add_option("--inject-pair-scale", pair_scale)->group("");
  verify->add_option("--inject-gradient-offset", grad_offset)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_path, flags);
    return cmd_verify(verify_path, flags, pair_scale, grad_offset);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
