// Discretized replica imaginary-time contours: segment masks, noise-vertex
// pairings and the analytic free propagator used as the inverse-kernel seed.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace sykci {

enum class ContourKind { thermal, renyi2_qr, renyi2_q, renyi3_qr, renyi3_q };

const char* to_string(ContourKind k);
ContourKind contour_kind_from_string(const std::string& s);

// One bilocal noise window: grid interval [k_begin, k_end) paired point-wise
// with partner[k - k_begin], coupling flavor_a (at the partner time) to
// flavor_b (at the window time), carrying theta_share of the total insertion.
struct NoiseWindow {
  int k_begin = 0;
  int k_end = 0;
  int flavor_a = 0;
  int flavor_b = 0;
  std::vector<int> partner;  // absolute grid index of the paired time
  std::vector<int> sign;     // sgn(tau_partner - tau_k), +1 for equal-time
  double theta_share = 1.0;
  bool imaginary_coupling = false;  // equal-time inter-replica pairing
};

// Precomputed antisymmetric vertex entry per unit theta. Row/col are
// flavor-major indices f*nt + k.
struct VertexEntry {
  int row;
  int col;
  std::complex<double> coeff;  // multiply by theta for the kernel value
};

struct ContourSpec {
  ContourKind kind = ContourKind::thermal;
  double beta = 1.0;
  int grid_per_beta = 0;  // M
  int flavors = 1;
  int length_in_beta = 1;

  std::vector<std::uint8_t> hamiltonian_mask;  // per grid point, shared by flavors
  std::vector<NoiseWindow> noise_windows;
  std::vector<VertexEntry> vertex_entries;  // both antisymmetric partners listed

  int nt() const { return length_in_beta * grid_per_beta; }
  int dim() const { return flavors * nt(); }
  double dtau() const { return beta / grid_per_beta; }
  double tau(int k) const { return (k + 0.5) * dtau(); }
  // J=0 contour value -log Z_free / N for the log-det regularization
  double free_action() const;
};

// Geometry for the requested diagram. M must be even and at least 8.
ContourSpec build_contour(ContourKind kind, double beta, int M);

struct FreePropagator {
  ContourSpec spec;
  Eigen::MatrixXd values;  // 1/2 sgn(tau - tau'), block-diagonal in flavor
};

FreePropagator free_propagator(const ContourSpec& spec);

// Antiperiodic extension of the free kernel to arbitrary time separation.
double free_g(double dtau_sep, double total_length);

struct BilocalField {
  ContourSpec spec;
  Eigen::MatrixXcd values;
};

// Bilocal insertion kernel with total integrated strength theta.
BilocalField noise_vertex(const ContourSpec& spec, double theta);

}  // namespace sykci
