// Raw matrix-level closures shared by the public model ops and the solver
// hot paths. Scalar T is double or std::complex<double>.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "sykci/models.hpp"

namespace sykci::detail {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Sigma = J^2 G^3 with both times on the SYK-evolution mask.
template <class T>
void syk_sigma_raw(const Mat<T>& G, const std::vector<std::uint8_t>& mask,
                   int nt, double J2, Mat<T>& out) {
  const int dim = static_cast<int>(G.rows());
  out.resize(dim, dim);
  for (int j = 0; j < dim; ++j) {
    if (!mask[j % nt]) {
      out.row(j).setZero();
      continue;
    }
    for (int k = 0; k < dim; ++k) {
      if (!mask[k % nt]) {
        out(j, k) = T(0);
        continue;
      }
      const T g = G(j, k);
      out(j, k) = J2 * g * g * g;
    }
  }
}

// Low-rank bosonized closure: Pi = G^2, D = (g^-2 Id - Pi)^-1, Sigma =
// c gamma D G. The boson self-tunes towards criticality at low T, so the
// kernel is inverted in its eigenbasis with soft modes clamped at a small
// positive floor; clamped == true signals the iterate overshot the stable
// regime (the solution itself must come out unclamped).
template <class T>
void lowrank_sigma_raw(const Mat<T>& G, const std::vector<std::uint8_t>& mask,
                       int nt, double g2, double cgamma, double dtau,
                       Mat<T>& out, double* boson_logdet = nullptr,
                       bool* clamped = nullptr, double floor_eps = 1e-8) {
  const int dim = static_cast<int>(G.rows());
  Mat<T> Pi(dim, dim);
  for (int j = 0; j < dim; ++j) {
    if (!mask[j % nt]) {
      Pi.row(j).setZero();
      continue;
    }
    for (int k = 0; k < dim; ++k) {
      if (!mask[k % nt]) {
        Pi(j, k) = T(0);
        continue;
      }
      const T g = G(j, k);
      Pi(j, k) = g * g;
    }
  }
  // B = Id - g^2 dtau Pi is real symmetric for every contour in use
  Eigen::MatrixXd Br(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      const std::complex<double> z(Pi(j, k));
      Br(j, k) = -g2 * dtau * z.real();
    }
  if ((Pi - Pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw SingularKernelError("lowrank closure: polarization not symmetric");
  Br = 0.5 * (Br + Br.transpose()).eval();
  Br.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Br);
  bool any_clamped = false;
  double logdet = 0.0;
  Eigen::VectorXd inv_ev(dim);
  for (int i = 0; i < dim; ++i) {
    double ev = es.eigenvalues()(i);
    if (ev < floor_eps) {
      ev = floor_eps;
      any_clamped = true;
    }
    logdet += std::log(ev);
    inv_ev(i) = 1.0 / ev;
  }
  if (clamped)
    *clamped = any_clamped;
  else if (any_clamped)
    throw SingularKernelError("lowrank closure: boson kernel singular");
  if (boson_logdet) *boson_logdet = logdet;
  Eigen::MatrixXd D = es.eigenvectors() * inv_ev.asDiagonal() *
                      es.eigenvectors().transpose() * (g2 / dtau);
  out.resize(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      const bool on = mask[j % nt] && mask[k % nt];
      out(j, k) = on ? T(cgamma) * T(D(j, k)) * G(j, k) : T(0);
    }
}

template <class T>
void model_sigma_raw(const Mat<T>& G, const ContourSpec& spec,
                     const ModelParams& p, Mat<T>& out,
                     double* boson_logdet = nullptr, bool* clamped = nullptr) {
  if (p.model == Model::syk) {
    syk_sigma_raw(G, spec.hamiltonian_mask, spec.nt(), p.J * p.J, out);
    if (boson_logdet) *boson_logdet = 0.0;
    if (clamped) *clamped = false;
  } else {
    lowrank_sigma_raw(G, spec.hamiltonian_mask, spec.nt(), p.g * p.g,
                      lowrank_closure_constant() * p.rank_gamma, spec.dtau(),
                      out, boson_logdet, clamped);
  }
}

}  // namespace sykci::detail
