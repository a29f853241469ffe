// Self-energy closures and disorder-averaged action densities for the SYK
// model and the low-rank SYK family.
#pragma once

#include <stdexcept>

#include "sykci/contour.hpp"

namespace sykci {

enum class Model { syk, lowrank };

struct ModelParams {
  Model model = Model::syk;
  double J = 1.0;          // SYK coupling
  double g = 1.0;          // low-rank coupling, g^2 carries the energy scale
  double rank_gamma = 1.0; // rank density

  // Energy scale that sets the grid policy dtau * scale <= target.
  double coupling_scale() const;
  void validate() const;
};

// Signals a boson kernel past the stable regime (low-rank closure).
struct SingularKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sigma = J^2 G^3 on the masked region, all flavor pairs.
BilocalField syk_self_energy(const BilocalField& G, const ModelParams& params);

// Bosonized closure: Pi = G^2, D = (g^-2 Id - Pi)^-1, Sigma = c gamma D G.
BilocalField lowrank_self_energy(const BilocalField& G, const ModelParams& params);

// Calibrated normalization constant c of the low-rank closure.
double lowrank_closure_constant();

// Forward relation gamma(Delta) and its numerical inverse on (1/4, 1/2).
double gamma_of_delta(double delta);
double delta_of_gamma(double rank_gamma);

// Per-Majorana action S/N with the regularized log-det (free value added back).
double action_density(const BilocalField& G, const BilocalField& Sigma,
                      const ContourSpec& spec, const ModelParams& params,
                      double theta);

}  // namespace sykci
