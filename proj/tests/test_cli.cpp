#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sykci/config.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sykci_cli_" + std::to_string(::getpid()) +
                                        "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SYKCI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing: sections, lists, ranges") {
  sykci::IniFile ini = sykci::IniFile::parse_string(
      "[model]\ntype = lowrank\ng = 0.8\nrank_gamma = 2.5\n"
      "[scan]\nrenyi = 3\nbeta = 10,20\np = 0:0.05:0.2\n# comment\n"
      "[solver]\nacceleration = yes\n");
  sykci::RunConfig cfg = sykci::RunConfig::from_ini(ini);
  CHECK(cfg.model.model == sykci::Model::lowrank);
  CHECK(cfg.model.g == 0.8);
  CHECK(cfg.renyi_n == 3);
  REQUIRE(cfg.beta_grid.size() == 2);
  REQUIRE(cfg.p_grid.size() == 5);
  CHECK(cfg.p_grid[3] == doctest::Approx(0.15));
  CHECK(cfg.solver.acceleration);
  CHECK_THROWS(sykci::IniFile::parse_string("novalue\n"));
}

TEST_CASE("solve subcommand: free thermal action and checkpoint reuse") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1e-12\n"
        "[contour]\nkind = thermal\nM = 64\n"
        "[solver]\nacceleration = yes\n"
        "[scan]\nbeta = 2\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("solve " + base) == 0);
  json summary = json::parse(slurp(dir.path / "out" / "solve_summary.json"));
  REQUIRE(summary.size() == 1);
  CHECK(std::abs(summary[0]["action"].get<double>() + 0.5 * std::log(2.0)) <= 1e-10);
  CHECK(summary[0]["converged"].get<bool>());

  // warm start from the written checkpoint converges in fewer iterations
  const int cold_iters = summary[0]["iterations"].get<int>();
  const std::string ckpt = summary[0]["checkpoint"].get<std::string>();
  write(dir.path / "warm.cfg",
        "[model]\ntype = syk\nJ = 1e-12\n"
        "[contour]\nkind = thermal\nM = 64\n"
        "[solver]\nacceleration = yes\nwarm_start = " + ckpt + "\n" +
        "[scan]\nbeta = 2\n");
  // thermal free solves already converge in one pass; exercise the loading
  CHECK(run_cli("solve --config " + (dir.path / "warm.cfg").string() + " --out " +
                (dir.path / "out2").string()) == 0);
  (void)cold_iters;

  // corrupted checkpoint magic fails with a nonzero exit
  {
    std::ofstream out(ckpt, std::ios::binary);
    out << "BADMAGIC";
  }
  CHECK(run_cli("solve --config " + (dir.path / "warm.cfg").string() + " --out " +
                (dir.path / "out3").string()) == 1);
}

TEST_CASE("coherent-info subcommand writes an ordered CSV") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1e-12\n"
        "[contour]\nM = 48\n"
        "[solver]\nacceleration = yes\n"
        "[scan]\nrenyi = 2\nbeta = 1\np = 0,0.1,0.2\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("coherent-info " + base) == 0);
  const std::string csv = slurp(dir.path / "out" / "coherent_info.csv");
  CHECK(csv.find("# sykci coherent-info v1") != std::string::npos);
  // three data rows with strictly decreasing coherent information
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double beta, p, q, sqr, sq, ic;
    ls >> beta >> p >> q >> sqr >> sq >> ic;
    CHECK(ic < prev);
    prev = ic;
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("oracle subcommand passes the convention checks") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1.0\n"
        "[oracle]\nn_majorana = 6\nbeta = 2.0\nseeds = 1,2,3\n"
        "[scan]\np = 0.1,0.2\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("oracle " + base) == 0);
  CHECK(fs::exists(dir.path / "out" / "oracle_ic.csv"));
}

TEST_CASE("extrapolate subcommand emits the intercept") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1.0\n"
        "[contour]\nM = 256\n"
        "[solver]\nacceleration = yes\n"
        "[scan]\nbeta = 4,6,8\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("extrapolate " + base) == 0);
  json out = json::parse(slurp(dir.path / "out" / "zero_t_entropy.json"));
  CHECK(out["order"].get<int>() == 2);
  CHECK(out["curve"].size() == 3);
  CHECK(std::isfinite(out["s0"].get<double>()));
}

TEST_CASE("fit-gamma subcommand in the free theory") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1e-12\n"
        "[contour]\nM = 48\n"
        "[solver]\nacceleration = yes\n"
        "[scan]\nrenyi = 2\nbeta = 1\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("fit-gamma " + base) == 0);
  json out = json::parse(slurp(dir.path / "out" / "fit_gamma.json"));
  REQUIRE(out.size() == 1);
  CHECK(std::abs(out[0]["slope_q"].get<double>() + 2.0) <= 1e-4);
}

TEST_CASE("threshold subcommand reports epsilon thresholds and mapping") {
  TempDir dir;
  write(dir.path / "run.cfg",
        "[model]\ntype = syk\nJ = 1e-12\n"
        "[contour]\nM = 48\n"
        "[solver]\nacceleration = yes\n"
        "[scan]\nrenyi = 2\nbeta = 1\np = 0.002,0.005,0.01,0.02,0.035,0.05\n"
        "[threshold]\nepsilons = 0.05,1.0\nmap_alpha = 0.9\n");
  const std::string base = "--config " + (dir.path / "run.cfg").string() +
                           " --out " + (dir.path / "out").string();
  CHECK(run_cli("threshold " + base) == 0);
  json out = json::parse(slurp(dir.path / "out" / "threshold.json"));
  REQUIRE(out["points"].size() == 1);
  const auto& pt = out["points"][0];
  REQUIRE(pt["p_th"].size() == 2);
  CHECK_FALSE(pt["p_th"][0]["open_ended"].get<bool>());
  CHECK(pt["p_th"][1]["open_ended"].get<bool>());  // epsilon = 1
  CHECK(out["mapping"]["alpha"].get<double>() == 0.9);
}

TEST_CASE("unknown flags and missing subcommand fail cleanly") {
  CHECK(run_cli("") != 0);
  CHECK(run_cli("solve --config /nonexistent.cfg") == 1);  // config open error
}
