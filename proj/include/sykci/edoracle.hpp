// Exact small-N oracle: Majorana algebra on qubits, TFD states, exact
// channels and Renyi coherent information, used to pin conventions.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sykci/models.hpp"

namespace sykci::edoracle {

using cplx = std::complex<double>;

// Phased permutation |i> -> phase[i] |perm[i]>. Majorana strings and their
// products stay in this class, so channel application is O(dim^2).
struct PermOp {
  std::vector<int> perm;
  std::vector<cplx> phase;

  int dim() const { return static_cast<int>(perm.size()); }
  static PermOp identity(int dim);
  PermOp after(const PermOp& other) const;  // (this ∘ other)
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd conjugate(const Eigen::MatrixXcd& rho) const;  // P rho P^dag
  Eigen::MatrixXcd dense() const;
};

// Jordan-Wigner chain of n Majoranas on n/2 qubits, normalized gamma^2 = 1/2.
class MajoranaAlgebra {
 public:
  explicit MajoranaAlgebra(int n_majorana);
  int n() const { return n_; }
  int dim() const { return dim_; }
  const PermOp& gamma(int i) const { return gam_[i]; }
  PermOp monomial(unsigned bits) const;  // ordered product over set bits
  Eigen::MatrixXcd parity_dense() const; // qubit Z-string

 private:
  int n_, dim_;
  std::vector<PermOp> gam_;
};

// SYK-type Hamiltonian over the given Majorana operators.
Eigen::MatrixXcd build_hamiltonian(const std::vector<PermOp>& gammas,
                                   unsigned seed, const ModelParams& params);

// System Q and reference R, N Majoranas each, on N qubits; Q occupies the
// low qubit block so partial traces are plain index sums.
class OracleSystem {
 public:
  explicit OracleSystem(int n_majorana);
  int N() const { return N_; }
  int dim() const { return alg_.dim(); }
  const MajoranaAlgebra& algebra() const { return alg_; }
  const PermOp& gamma_q(int j) const { return alg_.gamma(j); }
  const PermOp& gamma_r(int j) const { return alg_.gamma(N_ + j); }
  std::vector<PermOp> gammas_q() const;
  std::vector<PermOp> gammas_r() const;

  // |Phi_QR>, annihilated by gamma_Q^j - i gamma_R^j
  Eigen::VectorXcd max_entangled() const;
  // normalized e^{-beta H_R / 2} |Phi_QR>
  Eigen::VectorXcd tfd_state(const Eigen::MatrixXcd& h_r, double beta) const;

 private:
  int N_;
  MajoranaAlgebra alg_;
};

// Product channels acting on the Q Majoranas of a QR density matrix.
Eigen::MatrixXcd apply_channel_single(const OracleSystem& sys,
                                      const Eigen::MatrixXcd& rho, double p);
Eigen::MatrixXcd apply_channel_pair(const OracleSystem& sys,
                                    const Eigen::MatrixXcd& rho, double q);

Eigen::MatrixXcd reduce_to_q(const OracleSystem& sys,
                             const Eigen::MatrixXcd& rho);

// S^(n) = log tr rho^n / (1 - n)
double renyi_entropy(const Eigen::MatrixXcd& rho, int n);

// I_c^(n) after the product channels at rates (p, q) on a pure QR state.
double exact_coherent_info(const OracleSystem& sys,
                           const Eigen::VectorXcd& state, double p, double q,
                           int n);

// Max deviation between the Kraus-built doubled operator and C exp of the
// bilinear (single) / quartic (pair) form, over the parity-even algebra.
double verify_channel_choi(double p, int n_majorana);
double verify_channel_choi_pair(double q, int n_majorana);

// Exact per-pair angle of the quartic form and its large-N asymptotic.
double pair_angle_exact(double q, int n_majorana);
double pair_angle_asymptotic(double q, int n_majorana);

}  // namespace sykci::edoracle
