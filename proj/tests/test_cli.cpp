#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "test_support.hpp"

using namespace vsq;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(VSQ_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  Outcome o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string config_path(const std::string& name) { return std::string(VSQ_CONFIG_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const nlohmann::json& j) {
  const auto dir = std::filesystem::temp_directory_path() / "vsq_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << j.dump(2);
  return path.string();
}

nlohmann::json lattice_config() {
  return nlohmann::json::parse(R"({
    "version": 1,
    "system": {"lattice": {"n_sites": 2, "U": 1.0, "g": 1.0, "omega": 1.0, "boundary": "open",
                           "correlation_range": "on-site", "mode_layout": "per-site"}},
    "ansatz": ["CS", "VT", "GSS"],
    "oracle": {"enable": false},
    "seed": 5
  })");
}

using Row = std::map<std::string, std::string>;

std::vector<Row> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      continue;
    }
    Row r;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) r[header[i]] = cells[i];
    rows.push_back(r);
  }
  return rows;
}

double num(const Row& r, const std::string& key) { return std::stod(r.at(key)); }

}  // namespace

TEST(Config, InvalidConfigsExitWithTwo) {
  auto unknown = lattice_config();
  unknown["colour"] = "blue";
  EXPECT_EQ(cli("run " + write_temp("unknown.json", unknown)).code, 2);

  auto no_version = lattice_config();
  no_version.erase("version");
  EXPECT_EQ(cli("run " + write_temp("no_version.json", no_version)).code, 2);

  auto empty_grid = lattice_config();
  empty_grid["sweep"] = {{"parameter", "g"}, {"grid", nlohmann::json::array()}};
  EXPECT_EQ(cli("run " + write_temp("empty_grid.json", empty_grid)).code, 2);

  auto two_sources = lattice_config();
  two_sources["system"]["molecule"] = {{"fcidump", "h2_sto3g.fcidump"}, {"dipole", "h2_sto3g.dipole"}};
  EXPECT_EQ(cli("run " + write_temp("two_sources.json", two_sources)).code, 2);

  auto missing_file = nlohmann::json::parse(R"({"version": 1, "ansatz": "VT",
    "system": {"molecule": {"fcidump": "nowhere.fcidump", "dipole": "nowhere.dipole",
                            "modes": [{"omega": 0.5, "lambda": 0.1}]}}})");
  EXPECT_EQ(cli("run " + write_temp("missing_file.json", missing_file)).code, 2);

  EXPECT_EQ(cli("run /nonexistent/config.json").code, 2);
  EXPECT_EQ(cli("run " + config_path("hh_g_sweep.json") + " --format xml").code, 2);
  EXPECT_EQ(cli("").code, 2);
}

TEST(Run, ZeroCouplingRowIsHartreeFockPlusZeroPoint) {
  auto c = lattice_config();
  c["sweep"] = {{"parameter", "g"}, {"grid", {0.0}}};
  c["oracle"] = {{"enable", true}, {"n_max", 6}, {"recheck", 0}};
  const auto o = cli("run " + write_temp("g0.json", c));
  ASSERT_EQ(o.code, 0);
  const auto rows = parse_csv(o.out);
  ASSERT_EQ(rows.size(), 3u);

  LatticeSpec s;
  s.n_sites = 2;
  s.U = 1.0;
  s.g = 0.0;
  s.boundary = Boundary::Open;
  s.correlation_range = CorrelationRange::OnSite;
  s.mode_layout = ModeLayout::PerSite;
  const auto fr = DipoleFrame::from(build_hubbard_holstein(s));
  const auto hf = scf_solve(fr, AnsatzKind::HF_bare);
  const double e_hf = test::textbook_rhf_energy(fr.h, fr.eri, hf.frame_density) + fr.e_core;
  for (const auto& r : rows) {
    EXPECT_EQ(r.at("status"), "ok");
    EXPECT_NEAR(num(r, "E_total"), e_hf + 2 * 0.5, 1e-9) << r.at("ansatz");
    EXPECT_EQ(num(r, "S_mf"), 0.0);
    EXPECT_NEAR(num(r, "S_ed"), 0.0, 1e-12);
  }
}

TEST(Run, FrozenScanNeverBeatsFreeOptimum) {
  auto c = lattice_config();
  c["ansatz"] = {"GSS", "SGS"};
  c["reference"] = "VT";
  c["sweep"] = {{"parameter", "r"}, {"grid", {-0.1, -0.05, 0.0, 0.05, 0.1}}};
  const auto o = cli("run " + write_temp("r_frozen.json", c));
  ASSERT_EQ(o.code, 0);
  const auto rows = parse_csv(o.out);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& r : rows) {
    ASSERT_EQ(r.at("status"), "ok");
    EXPECT_LE(num(r, "dE_free"), 1e-9) << r.at("ansatz") << " r=" << r.at("value");
    EXPECT_EQ(num(r, "r"), num(r, "value"));
  }
}

TEST(Run, SqueezeScanOnWaterHasInteriorMinimum) {
  const auto o = cli("run " + config_path("h2o_r_scan.json"));
  ASSERT_EQ(o.code, 0);
  const auto rows = parse_csv(o.out);
  ASSERT_GE(rows.size(), 5u);
  std::vector<double> de;
  for (const auto& r : rows) de.push_back(num(r, "dE_ref"));
  const auto best = std::min_element(de.begin(), de.end()) - de.begin();
  EXPECT_GT(best, 0);
  EXPECT_LT(best, static_cast<long>(de.size()) - 1);
  EXPECT_LT(de[best], 0.0);
  for (std::size_t i = 1; i < de.size(); ++i) {
    if (static_cast<long>(i) <= best) EXPECT_LT(de[i], de[i - 1]) << i;
    else EXPECT_GT(de[i], de[i - 1]) << i;
  }
}

TEST(Run, OutputIsByteStableAndCarriesHash) {
  const std::string path = write_temp("stable.json", lattice_config());
  const auto a = cli("run " + path + " --jobs 1");
  const auto b = cli("run " + path + " --jobs 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto rows = parse_csv(a.out);
  ASSERT_EQ(rows.size(), 3u);
  const std::string hash = rows[0].at("config_hash");
  EXPECT_EQ(hash.size(), 16u);
  for (const auto& r : rows) EXPECT_EQ(r.at("config_hash"), hash);
  const auto reseeded = parse_csv(cli("run " + path + " --seed 99").out);
  EXPECT_NE(reseeded.at(0).at("config_hash"), hash);
}

TEST(Run, JsonLinesCarryEveryField) {
  const std::string out = (std::filesystem::temp_directory_path() / "vsq_cli_test" / "rows.jsonl").string();
  const auto o = cli("run " + write_temp("jsonl.json", lattice_config()) + " --format jsonl -o " + out);
  ASSERT_EQ(o.code, 0);
  EXPECT_TRUE(o.out.empty());
  std::ifstream in(out);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"config_hash", "ansatz", "status", "converged", "energy", "f", "r", "z", "S_mf"})
      EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(j["energy"].contains("photon"));
    ++n;
  }
  EXPECT_EQ(n, 3);
}

TEST(Run, ExitCodeReflectsWhetherAnyRowSucceeded) {
  RunRow ok, bad;
  bad.status = "error: diverged";
  EXPECT_EQ(run_exit_code({bad, ok}), 0);
  EXPECT_EQ(run_exit_code({bad, bad}), 1);
  EXPECT_EQ(run_exit_code({}), 1);
}

TEST(Verify, DefaultSuitePasses) {
  const auto o = cli("verify");
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
  EXPECT_NE(o.out.find("PASS"), std::string::npos);
}

TEST(Verify, WrongPairCoefficientFailsSpectrumInvariance) {
  const auto o = cli("verify --inject-pair-scale 1.5");
  EXPECT_EQ(o.code, 1);
  bool spectrum_failed = false;
  std::istringstream in(o.out);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("FAIL", 0) == 0 && line.find("spectrum") != std::string::npos) spectrum_failed = true;
  EXPECT_TRUE(spectrum_failed) << o.out;
}

TEST(Verify, PerturbedGradientFailsGradientCheck) {
  const auto o = cli("verify --inject-gradient-offset 1e-3 --format jsonl");
  EXPECT_EQ(o.code, 1);
  bool gradient_failed = false;
  std::istringstream in(o.out);
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    if (!j["pass"].get<bool>() && j["check"].get<std::string>().rfind("dE/d", 0) != std::string::npos)
      gradient_failed = true;
  }
  EXPECT_TRUE(gradient_failed) << o.out;
}
