#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sykci/analysis.hpp"

using namespace sykci;

TEST_CASE("conformal fit recovers synthetic data exactly") {
  const double beta = 10.0;
  const int M = 512;
  Eigen::VectorXd prof(M);
  const double delta = 0.3, amp = 0.7;
  prof(0) = 0.0;
  for (int d = 1; d < M; ++d) {
    const double tau = d * beta / M;
    prof(d) = amp * std::pow(M_PI / (beta * std::sin(M_PI * tau / beta)), 2 * delta);
  }
  ConformalFit f = fit_conformal(prof, beta);
  CHECK(f.delta == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(f.amplitude == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(f.residual < 1e-10);

  prof(M / 2) = -1.0;  // non-positive value inside the window
  CHECK_THROWS_AS(fit_conformal(prof, beta), std::runtime_error);
}

TEST_CASE("zero-temperature extrapolation") {
  // constant data
  std::vector<std::pair<double, double>> c = {{10, 0.4}, {20, 0.4}, {30, 0.4}, {40, 0.4}};
  CHECK(extrapolate_zero_T(c, 2).value == doctest::Approx(0.4).epsilon(1e-12));
  // linear in T recovered exactly at order 1 and 2
  std::vector<std::pair<double, double>> lin;
  for (double b : {10.0, 20.0, 40.0, 80.0}) lin.push_back({b, 0.25 + 1.7 / b});
  CHECK(extrapolate_zero_T(lin, 1).value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(extrapolate_zero_T(lin, 2).value == doctest::Approx(0.25).epsilon(1e-9));
  std::vector<std::pair<double, double>> two = {{10, 1.0}, {20, 2.0}};
  CHECK_THROWS_AS(extrapolate_zero_T(two, 2), std::invalid_argument);
}

TEST_CASE("epsilon threshold on synthetic curves") {
  std::vector<std::pair<double, double>> curve;
  const double clean = 0.4;
  for (int i = 0; i <= 10; ++i) {
    const double p = 0.01 * i;
    curve.push_back({p, clean - 2.0 * p});  // linear decrease
  }
  // cut at (1-eps) clean: crossing at p = eps clean / 2
  for (double eps : {0.05, 0.1, 0.25}) {
    ThresholdPoint t = epsilon_threshold(curve, clean, eps);
    CHECK_FALSE(t.open_ended);
    CHECK(t.rate == doctest::Approx(eps * clean / 2.0).epsilon(1e-10));
  }
  // larger epsilon never yields a smaller threshold
  double prev = 0.0;
  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const double r = epsilon_threshold(curve, clean, eps).rate;
    CHECK(r >= prev);
    prev = r;
  }
  // epsilon = 1 passes everywhere: open-ended at the right edge
  ThresholdPoint t1 = epsilon_threshold(curve, clean, 1.0);
  CHECK(t1.open_ended);
  CHECK(t1.rate == curve.back().first);
  // non-monotone input is rejected
  auto bad = curve;
  bad[5].second = clean + 0.1;
  CHECK_THROWS_AS(epsilon_threshold(bad, clean, 0.1), std::invalid_argument);
}

TEST_CASE("ssb onset detection") {
  std::vector<std::pair<double, double>> flat;
  for (int i = 1; i <= 10; ++i) flat.push_back({0.05 * i, 0.0});
  SsbOnset none = detect_ssb_onset(flat, 1e-4);
  CHECK(none.open_ended);

  // synthetic step at q = 0.2
  auto phi_of_q = [](double q) { return q > 0.2 ? 0.3 : 0.0; };
  std::vector<std::pair<double, double>> step;
  for (int i = 1; i <= 10; ++i) {
    const double q = 0.05 * i;
    step.push_back({q, phi_of_q(q)});
  }
  SsbOnset coarse = detect_ssb_onset(step, 1e-4);
  CHECK_FALSE(coarse.open_ended);
  CHECK(std::abs(coarse.q_c - 0.2) <= 0.05);
  SsbOnset fine = detect_ssb_onset(step, 1e-4, phi_of_q);
  CHECK(std::abs(fine.q_c - 0.2) <= 0.001);

  SsbOnset tr = detect_ssb_transition(step, phi_of_q);
  CHECK(std::abs(tr.q_c - 0.2) <= 0.001);
}

TEST_CASE("spinodal fit recovers the divergence of the symmetric branch") {
  const double gamma = 8.0, g = 0.1;
  std::vector<std::pair<double, double>> scan;
  for (double q : {0.02, 0.03, 0.04, 0.06, 0.08, 0.1, 0.115, 0.2, 0.3})
    scan.push_back({q, (1.0 / q > gamma) ? 2 * g / (1.0 / q - gamma) : 0.5});
  SsbOnset s = ssb_spinodal(scan, 0.15);
  CHECK_FALSE(s.open_ended);
  CHECK(s.q_c == doctest::Approx(1.0 / gamma).epsilon(1e-6));

  std::vector<std::pair<double, double>> empty_scan = {{0.1, 0.0}, {0.2, 0.0}};
  CHECK(ssb_spinodal(empty_scan, 0.15).open_ended);
}

TEST_CASE("fit_gamma at zero coupling has exact slopes and O(1) curvatures") {
  ModelParams p;
  p.J = 0.0;
  ChannelConfig cc;
  cc.M = 64;
  cc.solver.acceleration = true;
  PerturbativeFit f = fit_gamma(1.0, p, 2, cc);
  // d s_q / dp at 0 equals -4 G_{2b}(b) = -2 exactly in the free theory
  CHECK(f.slope_q == doctest::Approx(-2.0).epsilon(1e-5));
  CHECK(f.g_thermal_ref == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(f.slope_predicted == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(std::abs(f.slope_qr) <= 1e-4);
  // s_qr = -log 2 - log cosh(2 phi_p): curvature 2 at p = 0, with a small
  // cubic bias from the finite fit window
  CHECK(f.gamma_qr == doctest::Approx(2.0).epsilon(0.15));
  CHECK(f.gamma_q == doctest::Approx(2.0).epsilon(0.15));
  CHECK(f.renyi_n == 2);
  CHECK(f.fit_window.size() == 6);
}

TEST_CASE("thermal entropy curve is positive and decreasing in T at weak coupling") {
  ModelParams p;
  p.J = 1.0;
  SolverConfig sc;
  sc.acceleration = true;
  auto curve = thermal_entropy_curve({6.0, 10.0}, p, sc, 0.01, 512);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].second > curve[1].second);  // s decreases towards T = 0
  CHECK(curve[1].second > 0.0);
}
