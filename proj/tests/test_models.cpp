#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sykci/models.hpp"

using namespace sykci;

namespace {
BilocalField random_antisymmetric(const ContourSpec& s, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.3);
  BilocalField f;
  f.spec = s;
  f.values = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
  for (int a = 0; a < s.dim(); ++a)
    for (int b = 0; b < a; ++b) {
      const double x = gauss(rng);
      f.values(a, b) = x;
      f.values(b, a) = -x;
    }
  return f;
}
}  // namespace

TEST_CASE("syk closure: zero field, single entry, masked region") {
  ContourSpec s = build_contour(ContourKind::renyi2_q, 1.0, 8);
  ModelParams p;
  p.model = Model::syk;
  p.J = 1.0;

  BilocalField g;
  g.spec = s;
  g.values = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
  CHECK(syk_self_energy(g, p).values.cwiseAbs().maxCoeff() == 0.0);

  // both times inside the SYK segments
  g.values(2, 1) = 0.5;
  g.values(1, 2) = -0.5;
  BilocalField sig = syk_self_energy(g, p);
  CHECK(sig.values(2, 1).real() == doctest::Approx(0.125).epsilon(1e-15));

  // masked-out time wipes the entry regardless of G
  g.values.setZero();
  g.values(9, 1) = 0.5;  // index 9 lies in the noise window [M, 2M)
  g.values(1, 9) = -0.5;
  CHECK(syk_self_energy(g, p).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("syk closure is odd in G and preserves antisymmetry") {
  ContourSpec s = build_contour(ContourKind::renyi2_qr, 1.0, 8);
  ModelParams p;
  BilocalField g = random_antisymmetric(s, 11);
  BilocalField sig = syk_self_energy(g, p);
  CHECK((sig.values + sig.values.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
  BilocalField gm = g;
  gm.values = -g.values;
  CHECK((syk_self_energy(gm, p).values + sig.values).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("lowrank closure: zero field gives zero Sigma") {
  ContourSpec s = build_contour(ContourKind::thermal, 1.0, 16);
  ModelParams p;
  p.model = Model::lowrank;
  p.g = 1.0;
  p.rank_gamma = 2.0;
  BilocalField g;
  g.spec = s;
  g.values = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
  CHECK(lowrank_self_energy(g, p).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lowrank closure preserves antisymmetry") {
  ContourSpec s = build_contour(ContourKind::thermal, 1.0, 12);
  ModelParams p;
  p.model = Model::lowrank;
  p.g = 0.6;
  p.rank_gamma = 1.5;
  BilocalField g = random_antisymmetric(s, 3);
  BilocalField sig = lowrank_self_energy(g, p);
  CHECK((sig.values + sig.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("model mismatch is rejected") {
  ContourSpec s = build_contour(ContourKind::thermal, 1.0, 8);
  BilocalField g = random_antisymmetric(s, 5);
  ModelParams syk, lr;
  lr.model = Model::lowrank;
  CHECK_THROWS_AS(syk_self_energy(g, lr), std::invalid_argument);
  CHECK_THROWS_AS(lowrank_self_energy(g, syk), std::invalid_argument);
}

TEST_CASE("gamma(Delta) relation and its inverse") {
  // forward values
  CHECK(gamma_of_delta(0.3) == doctest::Approx(4.2360679).epsilon(1e-6));
  // round trip at Delta = 0.3
  CHECK(delta_of_gamma(4.2360679774997896) == doctest::Approx(0.3).epsilon(1e-10));
  // limits
  CHECK(delta_of_gamma(1e-6) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(delta_of_gamma(1e6) == doctest::Approx(0.25).epsilon(1e-3));
  CHECK_THROWS_AS(delta_of_gamma(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(delta_of_gamma(0.0), std::invalid_argument);
}

TEST_CASE("free action values per contour") {
  ModelParams p;
  p.J = 0.0;
  const double log2 = std::log(2.0);
  struct Row {
    ContourKind kind;
    double val;
  };
  for (auto [kind, val] : {Row{ContourKind::thermal, -0.5 * log2},
                           Row{ContourKind::renyi2_qr, -log2},
                           Row{ContourKind::renyi2_q, -0.5 * log2},
                           Row{ContourKind::renyi3_qr, -1.5 * log2},
                           Row{ContourKind::renyi3_q, -0.5 * log2}}) {
    ContourSpec s = build_contour(kind, 1.0, 8);
    FreePropagator g0 = free_propagator(s);
    BilocalField g;
    g.spec = s;
    g.values = g0.values.cast<std::complex<double>>();
    BilocalField sig;
    sig.spec = s;
    sig.values = Eigen::MatrixXcd::Zero(s.dim(), s.dim());
    CHECK(action_density(g, sig, s, p, 0.0) == doctest::Approx(val).epsilon(1e-12));
  }
}
