// Damped fixed-point solution of the Schwinger-Dyson equations on any
// contour, with the regularized log-det action evaluation.
#pragma once

#include <optional>
#include <vector>

#include "sykci/contour.hpp"
#include "sykci/models.hpp"

namespace sykci {

struct SolverConfig {
  double mixing = 0.3;         // damping weight x for G updates
  double tolerance = 1e-8;     // max-norm threshold on successive iterates
  int max_iterations = 4000;
  std::optional<BilocalField> warm_start;
  bool acceleration = false;  // weighted-history (Anderson) updates
  bool keep_fields = true;    // materialize G/Sigma in the result
  bool force_generic = false; // disable spectral / symmetric fast paths
};

struct SolveResult {
  BilocalField G;
  BilocalField Sigma;
  double action = 0.0;  // per-Majorana on-shell action
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  Eigen::VectorXd thermal_profile;  // G(tau_d) for thermal solves
};

SolveResult solve(const ContourSpec& spec, const ModelParams& params,
                  double theta, const SolverConfig& cfg);

// Sequential solves warm-started from the previous converged point.
std::vector<SolveResult> continuation_solve(const ContourSpec& spec,
                                            const ModelParams& params,
                                            const std::vector<double>& thetas,
                                            const SolverConfig& cfg);

// Default thermal grid: dtau * coupling_scale <= 0.025, within [256, 8192].
int default_thermal_M(double beta, const ModelParams& params);

// Thermal contour solve; M = 0 picks the default grid.
SolveResult thermal_solve(double beta, const ModelParams& params,
                          const SolverConfig& cfg, int M = 0);

// Thermal on-shell action -log Z_beta / N. The absolute action carries a
// 1/M discretization tail; richardson combines M and M/2 to remove it.
double free_energy_density(double beta, const ModelParams& params,
                           const SolverConfig& cfg, int M = 0,
                           bool richardson = true);

// ||(G0^-1 - Sigma - V) G - Id||_max in the seeded form ||B G - G0||_max.
double dyson_residual(const SolveResult& r, const ModelParams& params,
                      double theta);

}  // namespace sykci
