#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sykci/channels.hpp"

using namespace sykci;

namespace {
constexpr double kLog2 = 0.6931471805599453094;

ModelParams free_theory() {
  ModelParams p;
  p.J = 0.0;
  return p;
}

ChannelConfig fast_config(int M) {
  ChannelConfig c;
  c.M = M;
  c.solver.acceleration = true;
  return c;
}

double free_s_q(double theta) { return -0.5 * kLog2 - theta; }
double free_s_qr2(double theta) { return -kLog2 - std::log(std::cosh(theta)); }
}  // namespace

TEST_CASE("rate map phi_p and its inverse") {
  CHECK(phi_of_p(0.0) == 0.0);
  CHECK(phi_of_p(0.25) == doctest::Approx(std::atanh(1.0 / 3.0)).epsilon(1e-14));
  CHECK(phi_of_p(0.49) == doctest::Approx(-0.5 * std::log(0.02)).epsilon(1e-12));
  CHECK(phi_of_p(0.49) < 3.0);
  CHECK_THROWS_AS(phi_of_p(0.5), std::invalid_argument);
  for (double p : {0.0, 0.1, 0.3, 0.45})
    CHECK(p_of_phi(phi_of_p(p)) == doctest::Approx(p).epsilon(1e-14));
  CHECK(theta_of_p(0.2, 2) == doctest::Approx(2.0 * phi_of_p(0.2)).epsilon(1e-14));
  CHECK(theta_of_p(0.2, 3) == doctest::Approx(3.0 * phi_of_p(0.2)).epsilon(1e-14));
}

TEST_CASE("free-theory breaking entropies match the channel algebra") {
  const ChannelConfig cc = fast_config(128);
  const ModelParams p0 = free_theory();
  EntropyResult clean = entropies_breaking(1.0, p0, 0.0, 2, cc);
  CHECK(clean.ic_density == doctest::Approx(0.5 * kLog2).epsilon(1e-9));
  for (double p : {0.05, 0.2}) {
    const double th = theta_of_p(p, 2);
    EntropyResult r = entropies_breaking(1.0, p0, p, 2, cc);
    CHECK(r.s_q == doctest::Approx(free_s_q(th)).epsilon(5e-4));
    CHECK(r.s_qr == doctest::Approx(free_s_qr2(th)).epsilon(5e-4));
    CHECK(r.phi_star == 0.0);
    CHECK_FALSE(r.ssb);
  }
}

TEST_CASE("clean value at nonzero coupling is the partition-function ratio") {
  ModelParams p;
  p.J = 1.0;
  ChannelConfig cc = fast_config(64);
  const double beta = 4.0;
  EntropyResult r = entropies_breaking(beta, p, 0.0, 2, cc);
  SolverConfig sc;
  sc.acceleration = true;
  sc.keep_fields = false;
  const double a2b = free_energy_density(2 * beta, p, sc, 256);
  const double ab = free_energy_density(beta, p, sc, 128);
  CHECK(r.ic_density == doctest::Approx(a2b - 2.0 * ab).epsilon(2e-3));
}

TEST_CASE("free-theory HS minimization has the exact closed form") {
  // at J = 0 and n = 2 the minimizer is phi* = q below the symmetric
  // pitchfork of the QR diagram at q = 1/2, and ic = log(2)/2 - q
  const ModelParams p0 = free_theory();
  ChannelConfig cc = fast_config(64);
  cc.phi_points = 25;
  for (double q : {0.1, 0.3}) {
    EntropyResult r = entropies_conserving(1.0, p0, q, 2, cc);
    CHECK(r.phi_star == doctest::Approx(q).epsilon(5e-3));
    CHECK(r.ic_density == doctest::Approx(0.5 * kLog2 - q).epsilon(2e-3));
    CHECK(r.ssb);
  }
  CHECK_THROWS_AS(entropies_conserving(1.0, p0, 0.0, 2, cc), std::invalid_argument);
}

TEST_CASE("both-noise pipeline reduces to the single-noise ones") {
  const ModelParams p0 = free_theory();
  ChannelConfig cc = fast_config(64);
  cc.phi_points = 25;
  EntropyResult a = entropies_both(1.0, p0, 0.1, 0.0, 2, cc);
  EntropyResult b = entropies_breaking(1.0, p0, 0.1, 2, cc);
  CHECK(a.ic_density == doctest::Approx(b.ic_density).epsilon(1e-10));
  EntropyResult c = entropies_both(1.0, p0, 0.0, 0.3, 2, cc);
  EntropyResult d = entropies_conserving(1.0, p0, 0.3, 2, cc);
  CHECK(c.ic_density == doctest::Approx(d.ic_density).epsilon(1e-8));
  // tiny q pins phi at zero: approaches the breaking value
  EntropyResult e = entropies_both(1.0, p0, 0.1, 1e-4, 2, cc);
  CHECK(e.ic_density == doctest::Approx(b.ic_density).epsilon(1e-3));
  CHECK(e.phi_star <= 2e-4);
}

TEST_CASE("conserving scan: monotone decrease and shared table consistency") {
  const ModelParams p0 = free_theory();
  ChannelConfig cc = fast_config(64);
  cc.phi_points = 25;
  std::vector<double> qs = {0.05, 0.15, 0.25, 0.35};
  ActionTable table;
  auto scan = conserving_scan(1.0, p0, 2, qs, cc, &table);
  REQUIRE(scan.size() == qs.size());
  for (size_t i = 0; i < qs.size(); ++i) {
    CHECK(scan[i].converged);
    CHECK(scan[i].ic_density == doctest::Approx(0.5 * kLog2 - qs[i]).epsilon(5e-3));
    if (i > 0) CHECK(scan[i].ic_density < scan[i - 1].ic_density);
  }
  CHECK(table.phi.size() == 25);
  CHECK(table.s_q[0] == doctest::Approx(-0.5 * kLog2).epsilon(1e-9));
  CHECK(table.s_qr[0] == doctest::Approx(-kLog2).epsilon(1e-9));
}

TEST_CASE("renyi-3 free-theory pipeline") {
  const ModelParams p0 = free_theory();
  ChannelConfig cc = fast_config(96);
  const double p = 0.15;
  EntropyResult r = entropies_breaking(1.0, p0, p, 3, cc);
  const double th = theta_of_p(p, 3);
  const double w = std::tanh(th / 3.0);
  const double s_qr3 = -1.5 * kLog2 + 1.5 * std::log1p(-w * w) - std::log1p(w * w * w);
  CHECK(r.s_q == doctest::Approx(free_s_q(th)).epsilon(1e-3));
  CHECK(r.s_qr == doctest::Approx(s_qr3).epsilon(1e-3));
  EntropyResult clean = entropies_breaking(1.0, p0, 0.0, 3, cc);
  CHECK(clean.ic_density == doctest::Approx(0.5 * kLog2).epsilon(1e-9));
}

TEST_CASE("coherent information is monotone and bounded at weak coupling") {
  ModelParams p;
  p.J = 1.0;
  ChannelConfig cc = fast_config(48);
  const double beta = 3.0;
  const double clean = entropies_breaking(beta, p, 0.0, 2, cc).ic_density;
  double prev = clean;
  for (double rate : {0.05, 0.15, 0.3}) {
    const double ic = entropies_breaking(beta, p, rate, 2, cc).ic_density;
    CHECK(ic < prev);
    CHECK(ic >= -clean - 1e-6);
    prev = ic;
  }
}

TEST_CASE("baseline without encoding: exact values and channel floor") {
  CHECK(baseline_no_encoding(0.0, 0.0) == doctest::Approx(0.5 * kLog2).epsilon(1e-12));
  // bare Bell pairs are the free theory: closed form at any p
  for (double p : {0.1, 0.3, 0.49}) {
    const double th = 2.0 * phi_of_p(p);
    const double expect = 0.5 * kLog2 - th + std::log(std::cosh(th));
    CHECK(baseline_no_encoding(p, 0.0) == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(baseline_no_encoding(0.49, 0.0) ==
        doctest::Approx(-0.5 * kLog2).epsilon(5e-3));
  const double ic_q = baseline_no_encoding(0.0, 0.4);
  CHECK(ic_q < 0.5 * kLog2);
  CHECK(ic_q >= -0.5 * kLog2 - 1e-12);
  CHECK_THROWS_AS(baseline_no_encoding(0.6, 0.0), std::invalid_argument);
}
