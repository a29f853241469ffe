// Maps physical channel rates to contour insertion strengths and assembles
// the entropies / coherent information, including the Hubbard-Stratonovich
// outer minimization for parity-conserving noise.
#pragma once

#include <functional>

#include "sykci/config.hpp"
#include "sykci/solver.hpp"

namespace sykci {

// phi_x = atanh(x / (1-x)) = -log(1 - 2x) / 2
double phi_of_p(double p);
double p_of_phi(double phi);

struct NoiseParams {
  double p = 0.0;  // parity-breaking rate, [0, 1/2)
  double q = 0.0;  // parity-conserving rate (per-pair strength q/N)
  double phi0() const { return phi_of_p(p); }
};

struct EntropyResult {
  double s_qr = 0.0;
  double s_q = 0.0;
  double ic_density = 0.0;  // (s_q - s_qr) / (n - 1)
  int renyi_n = 2;
  double phi_star = 0.0;
  bool ssb = false;
  bool converged = true;
};

struct ChannelConfig {
  SolverConfig solver;
  int M = 0;                  // replica grid override, 0 = policy
  double dtau_target = 0.05;  // dtau * coupling_scale target
  double ssb_tol = 1e-4;
  int phi_points = 41;
  double phi_max = 0.0;  // 0 -> 2 phi_p(0.45)
  int refine_solves = 8; // exact evaluations in the local HS refinement
  // noise-vertex discretization converges as 1/M; combine M and M/2 grids
  bool richardson = true;
};

ContourKind qr_kind(int n);
ContourKind q_kind(int n);

// Total contour insertion strength for n replica copies of the channel.
double theta_of_p(double p, int n);

EntropyResult entropies_breaking(double beta, const ModelParams& params,
                                 double p, int n, const ChannelConfig& cfg);

// s~(phi) sampled on a phi grid, shared by every q of a scan.
struct ActionTable {
  int renyi_n = 2;
  double beta = 0.0;
  std::vector<double> phi;
  std::vector<double> s_qr, s_q;  // NaN marks non-converged points
};

std::vector<double> default_phi_grid(int points, double phi_max);

ActionTable build_action_table(double beta, const ModelParams& params, int n,
                               const std::vector<double>& phis,
                               const ChannelConfig& cfg);

EntropyResult entropies_conserving(double beta, const ModelParams& params,
                                   double q, int n, const ChannelConfig& cfg,
                                   const std::vector<double>& phi_grid = {});

EntropyResult entropies_both(double beta, const ModelParams& params, double p,
                             double q, int n, const ChannelConfig& cfg,
                             const std::vector<double>& phi_grid = {});

// q-scan over one shared table; results aligned with qs.
std::vector<EntropyResult> conserving_scan(double beta,
                                           const ModelParams& params, int n,
                                           const std::vector<double>& qs,
                                           const ChannelConfig& cfg,
                                           ActionTable* table_out = nullptr);

// Renyi-2 coherent information per Majorana of bare Bell pairs under the
// same channels, from the exact small-N oracle.
double baseline_no_encoding(double p, double q);

}  // namespace sykci
