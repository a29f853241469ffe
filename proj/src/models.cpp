#include "sykci/models.hpp"

#include <cmath>

#include "sykci/detail/raw_closures.hpp"

namespace sykci {

namespace {

// Low-rank closure normalization. Default 2; calibrated against the
// gamma(Delta) relation by the thermal conformal fit (see tests).
constexpr double kLowRankC = 2.0;

// mask value for flavor-major index
inline double mask_at(const ContourSpec& s, int idx) {
  return s.hamiltonian_mask[idx % s.nt()] ? 1.0 : 0.0;
}

}  // namespace

double ModelParams::coupling_scale() const {
  if (model == Model::syk) return J;
  // effective quartic variance of the bosonized closure is c*gamma*g^4
  return std::sqrt(kLowRankC * rank_gamma) * g * g;
}

void ModelParams::validate() const {
  if (model == Model::syk) {
    if (!(J > 0.0)) throw std::invalid_argument("ModelParams: J must be positive for syk");
  } else {
    if (!(g > 0.0)) throw std::invalid_argument("ModelParams: g must be positive for lowrank");
    if (!(rank_gamma > 0.0))
      throw std::invalid_argument("ModelParams: rank_gamma must be positive for lowrank");
  }
}

double lowrank_closure_constant() { return kLowRankC; }

BilocalField syk_self_energy(const BilocalField& G, const ModelParams& params) {
  if (params.model != Model::syk)
    throw std::invalid_argument("syk_self_energy: model mismatch");
  const ContourSpec& s = G.spec;
  const int dim = s.dim();
  if (G.values.rows() != dim || G.values.cols() != dim)
    throw std::invalid_argument("syk_self_energy: field dimensions inconsistent with spec");
  BilocalField sig;
  sig.spec = s;
  sig.values.resize(dim, dim);
  const double J2 = params.J * params.J;
  for (int j = 0; j < dim; ++j) {
    const double mj = mask_at(s, j);
    for (int k = 0; k < dim; ++k) {
      const std::complex<double> gv = G.values(j, k);
      sig.values(j, k) = J2 * gv * gv * gv * mj * mask_at(s, k);
    }
  }
  return sig;
}

BilocalField lowrank_self_energy(const BilocalField& G, const ModelParams& params) {
  if (params.model != Model::lowrank)
    throw std::invalid_argument("lowrank_self_energy: model mismatch");
  const ContourSpec& s = G.spec;
  if (G.values.rows() != s.dim())
    throw std::invalid_argument("lowrank_self_energy: field dimensions inconsistent with spec");
  BilocalField sig;
  sig.spec = s;
  detail::lowrank_sigma_raw<std::complex<double>>(
      G.values, s.hamiltonian_mask, s.nt(), params.g * params.g,
      kLowRankC * params.rank_gamma, s.dtau(), sig.values);
  return sig;
}

double gamma_of_delta(double delta) {
  const double sec = 1.0 / std::cos(2.0 * M_PI * delta);
  return (2.0 * delta - 1.0) * (sec - 1.0) / (8.0 * delta - 2.0);
}

double delta_of_gamma(double rank_gamma) {
  if (!(rank_gamma > 0.0) || !std::isfinite(rank_gamma))
    throw std::invalid_argument("delta_of_gamma: rank_gamma must be positive and finite");
  // gamma(Delta) decreases monotonically from +inf at 1/4 to 0 at 1/2
  double lo = 0.25 + 1e-12, hi = 0.5 - 1e-12;
  if (gamma_of_delta(hi) >= rank_gamma) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_of_delta(mid) > rank_gamma)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double action_density(const BilocalField& G, const BilocalField& Sigma,
                      const ContourSpec& spec, const ModelParams& params,
                      double theta) {
  const int dim = spec.dim();
  if (G.values.rows() != dim || Sigma.values.rows() != dim)
    throw std::invalid_argument("action_density: dimension mismatch");
  const double dt = spec.dtau();
  const double dt2 = dt * dt;

  // regularized fermion log-det: log det(K) - log det(K0) = log det(B)
  Eigen::MatrixXd G0 = free_propagator(spec).values;
  Eigen::MatrixXcd S = Sigma.values;
  for (const auto& e : spec.vertex_entries) S(e.row, e.col) += theta * e.coeff;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Identity(dim, dim) - dt2 * (G0 * S);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(B);
  double logdet = 0.0;
  for (int i = 0; i < dim; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));

  double a = -0.5 * logdet + spec.free_action();

  // + 1/2 int Sigma G
  std::complex<double> sg = (Sigma.values.array() * G.values.array()).sum();
  a += 0.5 * dt2 * sg.real();

  if (params.model == Model::syk) {
    // - J^2/8 int (g g G^4)
    const double J2 = params.J * params.J;
    std::complex<double> g4 = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double mj = mask_at(spec, j);
      if (mj == 0.0) continue;
      for (int k = 0; k < dim; ++k) {
        const std::complex<double> gv = G.values(j, k);
        g4 += gv * gv * gv * gv * mask_at(spec, k);
      }
    }
    a -= (J2 / 8.0) * dt2 * g4.real();
  } else {
    // + (c gamma / 4) log det of the boson kernel Id + g^2 dtau Pi
    double logdet_b = 0.0;
    Eigen::MatrixXcd scratch;
    detail::lowrank_sigma_raw<std::complex<double>>(
        G.values, spec.hamiltonian_mask, spec.nt(), params.g * params.g,
        kLowRankC * params.rank_gamma, dt, scratch, &logdet_b);
    a += 0.25 * kLowRankC * params.rank_gamma * logdet_b;
  }
  return a;
}

}  // namespace sykci
