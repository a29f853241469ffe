#include "sykci/contour.hpp"

#include <cmath>
#include <stdexcept>

namespace sykci {

namespace {
constexpr double kLog2 = 0.6931471805599453094;

// Pair magnitude per unit theta: the window's share spread uniformly over its
// grid pairs, with the 1/dtau^2 delta weight making the integrated strength
// discretization-independent.
double pair_magnitude(double share, int n_pairs, double dtau) {
  return 2.0 * share / (static_cast<double>(n_pairs) * dtau * dtau);
}
}  // namespace

const char* to_string(ContourKind k) {
  switch (k) {
    case ContourKind::thermal: return "thermal";
    case ContourKind::renyi2_qr: return "renyi2_qr";
    case ContourKind::renyi2_q: return "renyi2_q";
    case ContourKind::renyi3_qr: return "renyi3_qr";
    case ContourKind::renyi3_q: return "renyi3_q";
  }
  return "?";
}

ContourKind contour_kind_from_string(const std::string& s) {
  if (s == "thermal") return ContourKind::thermal;
  if (s == "renyi2_qr") return ContourKind::renyi2_qr;
  if (s == "renyi2_q") return ContourKind::renyi2_q;
  if (s == "renyi3_qr") return ContourKind::renyi3_qr;
  if (s == "renyi3_q") return ContourKind::renyi3_q;
  throw std::invalid_argument("unknown contour kind: " + s);
}

double ContourSpec::free_action() const {
  switch (kind) {
    case ContourKind::thermal: return -0.5 * kLog2;   // -log Z_beta / N
    case ContourKind::renyi2_qr: return -kLog2;       // -2 log Z_beta / N
    case ContourKind::renyi2_q: return -0.5 * kLog2;  // -log Z_{2beta} / N
    case ContourKind::renyi3_qr: return -1.5 * kLog2; // -3 log Z_beta / N
    case ContourKind::renyi3_q: return -0.5 * kLog2;  // -log Z_{3beta} / N
  }
  return 0.0;
}

ContourSpec build_contour(ContourKind kind, double beta, int M) {
  if (!(beta > 0.0)) throw std::invalid_argument("build_contour: beta must be positive");
  if (M < 8 || M % 2 != 0)
    throw std::invalid_argument("build_contour: M must be even and >= 8");

  ContourSpec s;
  s.kind = kind;
  s.beta = beta;
  s.grid_per_beta = M;
  const double dt = s.dtau();

  auto mask_segments = [&](std::initializer_list<std::pair<int, int>> segs) {
    s.hamiltonian_mask.assign(s.nt(), 0);
    for (auto [a, b] : segs)
      for (int k = a; k < b; ++k) s.hamiltonian_mask[k] = 1;
  };

  auto add_entry = [&](int fa, int ja, int fb, int kb, std::complex<double> c) {
    const int nt = s.nt();
    s.vertex_entries.push_back({fa * nt + ja, fb * nt + kb, c});
    s.vertex_entries.push_back({fb * nt + kb, fa * nt + ja, -c});
  };

  switch (kind) {
    case ContourKind::thermal: {
      s.flavors = 1;
      s.length_in_beta = 1;
      mask_segments({{0, M}});
      break;
    }
    case ContourKind::renyi2_qr: {
      s.flavors = 2;
      s.length_in_beta = 2;
      mask_segments({{0, M}});
      NoiseWindow w;
      w.k_begin = M;
      w.k_end = 2 * M;
      w.flavor_a = 0;
      w.flavor_b = 1;
      w.theta_share = 1.0;
      w.imaginary_coupling = true;
      const double mag = pair_magnitude(1.0, M, dt);
      for (int k = M; k < 2 * M; ++k) {
        w.partner.push_back(k);
        w.sign.push_back(1);
        add_entry(0, k, 1, k, std::complex<double>(0.0, -mag));
      }
      s.noise_windows.push_back(std::move(w));
      break;
    }
    case ContourKind::renyi2_q: {
      s.flavors = 1;
      s.length_in_beta = 4;
      mask_segments({{0, M}, {2 * M, 3 * M}});
      NoiseWindow w;
      w.k_begin = M;
      w.k_end = 2 * M;
      w.theta_share = 1.0;
      const double mag = pair_magnitude(1.0, M, dt);
      for (int k = M; k < 2 * M; ++k) {
        const int j = 5 * M - 1 - k;  // tau + tau' = 5 beta, lands in [3b,4b)
        w.partner.push_back(j);
        w.sign.push_back(1);
        add_entry(0, j, 0, k, mag);
      }
      s.noise_windows.push_back(std::move(w));
      break;
    }
    case ContourKind::renyi3_qr: {
      s.flavors = 3;
      s.length_in_beta = 2;
      mask_segments({{0, M}});
      // One directed insertion per replica copy: flavor pairs (3,1),(2,3),
      // (1,2), each coupling the partner's second half-window at 3 beta - tau
      // to the first half-window at tau. Each idle half-window is used by
      // exactly one pairing, closing the replica cycle.
      const int pair_a[3] = {2, 1, 0};
      const int pair_b[3] = {0, 2, 1};
      const double mag = pair_magnitude(1.0 / 3.0, M / 2, dt);
      for (int p = 0; p < 3; ++p) {
        NoiseWindow w;
        w.k_begin = M;
        w.k_end = 3 * M / 2;
        w.flavor_a = pair_a[p];
        w.flavor_b = pair_b[p];
        w.theta_share = 1.0 / 3.0;
        for (int k = M; k < 3 * M / 2; ++k) {
          const int j = 3 * M - 1 - k;  // lands in [3M/2, 2M)
          w.partner.push_back(j);
          w.sign.push_back(1);
          add_entry(pair_a[p], j, pair_b[p], k, mag);
        }
        s.noise_windows.push_back(std::move(w));
      }
      break;
    }
    case ContourKind::renyi3_q: {
      s.flavors = 1;
      s.length_in_beta = 6;
      mask_segments({{0, M}, {2 * M, 3 * M}, {4 * M, 5 * M}});
      // half-windows paired across sheets: tau' = 7b - tau, 5b - tau, 9b - tau
      const int begins[3] = {M, 3 * M / 2, 7 * M / 2};
      const int ends[3] = {3 * M / 2, 2 * M, 4 * M};
      const int mirror[3] = {7 * M - 1, 5 * M - 1, 9 * M - 1};
      const double mag = pair_magnitude(1.0 / 3.0, M / 2, dt);
      for (int p = 0; p < 3; ++p) {
        NoiseWindow w;
        w.k_begin = begins[p];
        w.k_end = ends[p];
        w.theta_share = 1.0 / 3.0;
        for (int k = begins[p]; k < ends[p]; ++k) {
          const int j = mirror[p] - k;
          w.partner.push_back(j);
          w.sign.push_back(1);
          add_entry(0, j, 0, k, mag);
        }
        s.noise_windows.push_back(std::move(w));
      }
      break;
    }
  }
  return s;
}

double free_g(double dtau_sep, double total_length) {
  // antiperiodic extension of 1/2 sgn: period 2L with sign flip each L
  double t = std::fmod(dtau_sep, 2.0 * total_length);
  if (t < 0) t += 2.0 * total_length;
  if (t == 0.0) return 0.0;
  return (t < total_length) ? 0.5 : -0.5;
}

FreePropagator free_propagator(const ContourSpec& spec) {
  const int nt = spec.nt();
  FreePropagator g0;
  g0.spec = spec;
  g0.values = Eigen::MatrixXd::Zero(spec.dim(), spec.dim());
  for (int f = 0; f < spec.flavors; ++f) {
    const int off = f * nt;
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < nt; ++k)
        if (j != k) g0.values(off + j, off + k) = (j > k) ? 0.5 : -0.5;
  }
  return g0;
}

BilocalField noise_vertex(const ContourSpec& spec, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("noise_vertex: theta must be finite");
  BilocalField v;
  v.spec = spec;
  v.values = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
  for (const auto& e : spec.vertex_entries) v.values(e.row, e.col) += theta * e.coeff;
  return v;
}

}  // namespace sykci
