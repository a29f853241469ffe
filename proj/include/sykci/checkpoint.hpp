// Binary checkpoints for converged bilocal fields: magic "SYKGF01\n",
// 4-byte little-endian header length, JSON header, raw row-major payload.
#pragma once

#include <string>

#include "sykci/contour.hpp"
#include "sykci/models.hpp"

namespace sykci {

void save_checkpoint(const std::string& path, const BilocalField& G,
                     const ModelParams& params, double theta);

// Rebuilds the contour from the header. Optional outputs receive the stored
// model parameters and insertion strength.
BilocalField load_checkpoint(const std::string& path,
                             ModelParams* params_out = nullptr,
                             double* theta_out = nullptr);

}  // namespace sykci
