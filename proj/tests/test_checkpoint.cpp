#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sykci/checkpoint.hpp"
#include "sykci/solver.hpp"

using namespace sykci;

namespace {
std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("checkpoint round-trip is exact for real fields") {
  ModelParams p;
  p.J = 1.0;
  ContourSpec spec = build_contour(ContourKind::renyi2_q, 2.0, 16);
  SolverConfig cfg;
  cfg.acceleration = true;
  SolveResult r = solve(spec, p, 0.4, cfg);
  REQUIRE(r.converged);

  const std::string path = temp_path("sykci_ckpt_real.sykgf");
  save_checkpoint(path, r.G, p, 0.4);

  ModelParams p2;
  double theta2 = 0.0;
  BilocalField g2 = load_checkpoint(path, &p2, &theta2);
  CHECK(theta2 == 0.4);
  CHECK(p2.model == Model::syk);
  CHECK(p2.J == 1.0);
  CHECK(g2.spec.kind == ContourKind::renyi2_q);
  CHECK(g2.spec.grid_per_beta == 16);
  CHECK(g2.spec.beta == 2.0);
  CHECK((g2.values - r.G.values).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint round-trip keeps complex fields bit-exact") {
  ModelParams p;
  p.J = 1.0;
  ContourSpec spec = build_contour(ContourKind::renyi2_qr, 1.0, 8);
  SolverConfig cfg;
  cfg.acceleration = true;
  SolveResult r = solve(spec, p, 0.5, cfg);
  REQUIRE(r.converged);
  REQUIRE(r.G.values.imag().cwiseAbs().maxCoeff() > 0.0);

  const std::string path = temp_path("sykci_ckpt_cplx.sykgf");
  save_checkpoint(path, r.G, p, 0.5);
  BilocalField g2 = load_checkpoint(path);
  CHECK((g2.values - r.G.values).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("corrupted magic is reported with the file name") {
  const std::string path = temp_path("sykci_ckpt_bad.sykgf");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTAGF00 garbage";
  }
  try {
    load_checkpoint(path);
    FAIL("expected a load error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
    CHECK(std::string(e.what()).find("magic") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("warm start from a checkpoint cuts iterations") {
  ModelParams p;
  p.J = 1.0;
  ContourSpec spec = build_contour(ContourKind::renyi2_q, 2.0, 16);
  SolverConfig cfg;
  cfg.acceleration = true;
  SolveResult cold = solve(spec, p, 0.3, cfg);
  REQUIRE(cold.converged);
  const std::string path = temp_path("sykci_ckpt_warm.sykgf");
  save_checkpoint(path, cold.G, p, 0.3);

  SolverConfig warm = cfg;
  warm.warm_start = load_checkpoint(path);
  SolveResult again = solve(spec, p, 0.3, warm);
  CHECK(again.converged);
  CHECK(again.iterations < cold.iterations);
  std::filesystem::remove(path);
}
