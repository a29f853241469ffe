// Conformal fits, perturbative coefficient extraction, zero-temperature
// extrapolation, epsilon-thresholds and SSB onset detection.
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sykci/channels.hpp"

namespace sykci {

struct ConformalFit {
  double delta = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // rms of the log-log fit
};

// Least squares of log G(tau) against log(pi / (beta sin(pi tau / beta)))
// on tau in [0.2 beta, 0.8 beta].
ConformalFit fit_conformal(const Eigen::VectorXd& profile, double beta);
ConformalFit fit_conformal(const BilocalField& G, double beta);

struct PerturbativeFit {
  double gamma_q = 0.0;
  double gamma_qr = 0.0;
  int renyi_n = 2;
  std::vector<double> fit_window;
  double residual = 0.0;
  double slope_q = 0.0;        // measured d s_q / dp at p = 0
  double slope_qr = 0.0;       // measured d s_qr / dp at p = 0
  double g_thermal_ref = 0.0;  // G_{n beta}(beta) from the thermal solve
  double slope_predicted = 0.0;  // -2 n G_{n beta}(beta)
};

PerturbativeFit fit_gamma(double beta, const ModelParams& params, int n,
                          const ChannelConfig& cfg);

struct Extrapolation {
  double value = 0.0;
  double uncertainty = 0.0;
};

// Polynomial fit in T = 1/beta; returns the T = 0 intercept.
Extrapolation extrapolate_zero_T(
    const std::vector<std::pair<double, double>>& beta_y, int order);

// Thermal entropy s(beta) = beta a'(beta) - a(beta) by central differences
// at fixed grid size.
std::vector<std::pair<double, double>> thermal_entropy_curve(
    const std::vector<double>& betas, const ModelParams& params,
    const SolverConfig& cfg, double rel_step = 0.01, int M = 0);

struct ThresholdPoint {
  double rate = 0.0;
  bool open_ended = false;
};

// Largest rate on a monotone non-increasing curve with ic >= (1-eps) clean.
ThresholdPoint epsilon_threshold(
    const std::vector<std::pair<double, double>>& curve, double clean,
    double epsilon);

struct SsbOnset {
  double q_c = 0.0;
  bool open_ended = false;
};

// Smallest q with phi_star > ssb_tol; bisection-refined when an evaluator
// phi_star(q) is supplied.
SsbOnset detect_ssb_onset(const std::vector<std::pair<double, double>>& scan,
                          double ssb_tol,
                          const std::function<double(double)>& phi_star_of_q = {});

// Location of the steepest growth of phi_star(q): the strong-to-weak
// transition estimate on a finite-temperature scan.
SsbOnset detect_ssb_transition(
    const std::vector<std::pair<double, double>>& scan,
    const std::function<double(double)>& phi_star_of_q = {}, int bisections = 10);

// Extrapolated divergence point of the symmetric-branch minimizer: on the
// perturbative branch 1/phi* is linear in 1/q, and its root marks the
// spinodal of the symmetric saddle. Fits points with 0 < phi* <= phi_fit_max.
SsbOnset ssb_spinodal(const std::vector<std::pair<double, double>>& scan,
                      double phi_fit_max = 0.15);

}  // namespace sykci
