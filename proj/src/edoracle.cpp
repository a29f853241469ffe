#include "sykci/edoracle.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sykci::edoracle {

namespace {
constexpr double kSqrtHalf = 0.7071067811865475244;

int popcount_below(unsigned i, int qubit) {
  return std::popcount(i & ((1u << qubit) - 1u));
}
}  // namespace

PermOp PermOp::identity(int dim) {
  PermOp p;
  p.perm.resize(dim);
  p.phase.assign(dim, 1.0);
  for (int i = 0; i < dim; ++i) p.perm[i] = i;
  return p;
}

PermOp PermOp::after(const PermOp& other) const {
  PermOp out;
  const int d = dim();
  out.perm.resize(d);
  out.phase.resize(d);
  for (int i = 0; i < d; ++i) {
    const int mid = other.perm[i];
    out.perm[i] = perm[mid];
    out.phase[i] = other.phase[i] * phase[mid];
  }
  return out;
}

Eigen::VectorXcd PermOp::apply(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (int i = 0; i < dim(); ++i) out(perm[i]) += phase[i] * v(i);
  return out;
}

Eigen::MatrixXcd PermOp::conjugate(const Eigen::MatrixXcd& rho) const {
  const int d = dim();
  Eigen::MatrixXcd out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out(perm[i], perm[j]) = phase[i] * std::conj(phase[j]) * rho(i, j);
  return out;
}

Eigen::MatrixXcd PermOp::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) m(perm[i], i) = phase[i];
  return m;
}

MajoranaAlgebra::MajoranaAlgebra(int n_majorana) : n_(n_majorana) {
  if (n_ < 2 || n_ % 2 != 0 || n_ > 32)
    throw std::invalid_argument("MajoranaAlgebra: n must be even, 2..32");
  const int nq = n_ / 2;
  dim_ = 1 << nq;
  gam_.reserve(n_);
  for (int i = 0; i < n_; ++i) {
    const int a = i / 2;
    const bool is_y = i % 2;
    PermOp op;
    op.perm.resize(dim_);
    op.phase.resize(dim_);
    for (int s = 0; s < dim_; ++s) {
      const double zsign = (popcount_below(s, a) % 2) ? -1.0 : 1.0;
      op.perm[s] = s ^ (1 << a);
      if (is_y) {
        const bool bit = (s >> a) & 1;
        op.phase[s] = cplx(0.0, bit ? -1.0 : 1.0) * zsign * kSqrtHalf;
      } else {
        op.phase[s] = zsign * kSqrtHalf;
      }
    }
    gam_.push_back(std::move(op));
  }
}

PermOp MajoranaAlgebra::monomial(unsigned bits) const {
  PermOp acc = PermOp::identity(dim_);
  for (int i = 0; i < n_; ++i)
    if (bits & (1u << i)) acc = acc.after(gam_[i]);
  return acc;
}

Eigen::MatrixXcd MajoranaAlgebra::parity_dense() const {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (int s = 0; s < dim_; ++s)
    p(s, s) = (std::popcount(static_cast<unsigned>(s)) % 2) ? -1.0 : 1.0;
  return p;
}

Eigen::MatrixXcd build_hamiltonian(const std::vector<PermOp>& gammas,
                                   unsigned seed, const ModelParams& params) {
  const int n = static_cast<int>(gammas.size());
  if (n < 4) throw std::invalid_argument("build_hamiltonian: need at least 4 Majoranas");
  const int dim = gammas[0].dim();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  std::mt19937_64 rng(seed);

  if (params.model == Model::syk) {
    // ordered couplings with variance 3! J^2 / N^3, matching Sigma = J^2 G^3
    const double sd = std::sqrt(6.0) * params.J / std::pow(n, 1.5);
    std::normal_distribution<double> gauss(0.0, sd);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
          for (int l = k + 1; l < n; ++l) {
            const double c = gauss(rng);
            const PermOp term =
                gammas[i].after(gammas[j]).after(gammas[k]).after(gammas[l]);
            for (int s = 0; s < dim; ++s) h(term.perm[s], s) += c * term.phase[s];
          }
  } else {
    // rank gamma*N modes of antisymmetrized pair couplings, H = sum b^2
    const int rank = std::max(1, static_cast<int>(std::lround(params.rank_gamma * n)));
    const double sd = params.g / n;
    std::normal_distribution<double> gauss(0.0, sd);
    for (int m = 0; m < rank; ++m) {
      Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(dim, dim);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double a = gauss(rng) - gauss(rng);  // u_ij - u_ji
          const PermOp term = gammas[i].after(gammas[j]);
          for (int s = 0; s < dim; ++s) b(term.perm[s], s) += a * term.phase[s];
        }
      h += b * b;
    }
  }
  return 0.5 * (h + h.adjoint());
}

OracleSystem::OracleSystem(int n_majorana) : N_(n_majorana), alg_(2 * n_majorana) {
  if (n_majorana < 2 || n_majorana % 2 != 0 || n_majorana > 16)
    throw std::invalid_argument("OracleSystem: n_majorana must be even, 2..16");
}

std::vector<PermOp> OracleSystem::gammas_q() const {
  std::vector<PermOp> v;
  for (int j = 0; j < N_; ++j) v.push_back(gamma_q(j));
  return v;
}

std::vector<PermOp> OracleSystem::gammas_r() const {
  std::vector<PermOp> v;
  for (int j = 0; j < N_; ++j) v.push_back(gamma_r(j));
  return v;
}

Eigen::VectorXcd OracleSystem::max_entangled() const {
  const int d = dim();
  auto project = [&](Eigen::VectorXcd v) {
    for (int j = 0; j < N_; ++j) {
      // (f f^dag / 2) v with f = gamma_Q - i gamma_R
      Eigen::VectorXcd a = gamma_q(j).apply(v), b = gamma_r(j).apply(v);
      Eigen::VectorXcd w = a + cplx(0, 1) * b;  // f^dag v
      a = gamma_q(j).apply(w);
      b = gamma_r(j).apply(w);
      v = 0.5 * (a - cplx(0, 1) * b);
    }
    return v;
  };
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  v(0) = 1.0;
  v = project(v);
  if (v.norm() < 1e-10) {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < d; ++i) v(i) = cplx(gauss(rng), gauss(rng));
    v = project(v);
  }
  const double nrm = v.norm();
  if (nrm < 1e-12)
    throw std::runtime_error("max_entangled: projector annihilated the seed");
  return v / nrm;
}

Eigen::VectorXcd OracleSystem::tfd_state(const Eigen::MatrixXcd& h_r,
                                         double beta) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_r);
  Eigen::VectorXcd phi = max_entangled();
  Eigen::VectorXcd w = es.eigenvectors().adjoint() * phi;
  for (int k = 0; k < w.size(); ++k)
    w(k) *= std::exp(-0.5 * beta * es.eigenvalues()(k));
  Eigen::VectorXcd v = es.eigenvectors() * w;
  return v / v.norm();
}

Eigen::MatrixXcd apply_channel_single(const OracleSystem& sys,
                                      const Eigen::MatrixXcd& rho, double p) {
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("apply_channel_single: p must lie in [0, 1/2)");
  Eigen::MatrixXcd out = rho;
  for (int j = 0; j < sys.N(); ++j)
    out = ((1.0 - p) * out + 2.0 * p * sys.gamma_q(j).conjugate(out)).eval();
  return out;
}

Eigen::MatrixXcd apply_channel_pair(const OracleSystem& sys,
                                    const Eigen::MatrixXcd& rho, double q) {
  const int n = sys.N();
  if (!(q >= 0.0 && q < 0.5 * n))
    throw std::invalid_argument("apply_channel_pair: need 0 <= q/N < 1/2");
  Eigen::MatrixXcd out = rho;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const PermOp op = sys.gamma_q(i).after(sys.gamma_q(j));
      out = ((1.0 - q / n) * out + (4.0 * q / n) * op.conjugate(out)).eval();
    }
  return out;
}

Eigen::MatrixXcd reduce_to_q(const OracleSystem& sys,
                             const Eigen::MatrixXcd& rho) {
  const int half = sys.N() / 2;  // Q occupies the low half of the qubits
  const int dq = 1 << half;
  const int dr = static_cast<int>(rho.rows()) / dq;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dq, dq);
  for (int r = 0; r < dr; ++r) {
    const int off = r << half;
    for (int a = 0; a < dq; ++a)
      for (int b = 0; b < dq; ++b) out(a, b) += rho(off + a, off + b);
  }
  return out;
}

double renyi_entropy(const Eigen::MatrixXcd& rho, int n) {
  double t;
  if (n == 2) {
    t = rho.squaredNorm();
  } else if (n == 3) {
    const Eigen::MatrixXcd r2 = rho * rho;
    t = (r2.array() * rho.transpose().array()).sum().real();
  } else {
    throw std::invalid_argument("renyi_entropy: n must be 2 or 3");
  }
  return std::log(t) / (1.0 - n);
}

double exact_coherent_info(const OracleSystem& sys,
                           const Eigen::VectorXcd& state, double p, double q,
                           int n) {
  Eigen::MatrixXcd rho = state * state.adjoint();
  if (p > 0.0) rho = apply_channel_single(sys, rho, p);
  if (q > 0.0) rho = apply_channel_pair(sys, rho, q);
  const double tr_dev = std::abs(rho.trace().real() - 1.0) +
                        std::abs(rho.trace().imag());
  if (tr_dev > 1e-12 * rho.rows())
    throw std::runtime_error("exact_coherent_info: channel broke the trace");
  const double s_qr = renyi_entropy(rho, n);
  const double s_q = renyi_entropy(reduce_to_q(sys, rho), n);
  return s_q - s_qr;
}

namespace {

// Doubled-operator comparison shared by both channel families. The channel
// is applied monomial by monomial in the system algebra, re-expanded, and
// compared in the doubled space against C exp(exponent). The single-site
// identity holds on the parity-even operator algebra, so callers restrict
// the basis accordingly.
template <class ChannelFn>
double choi_deviation(int n_majorana, bool even_only, ChannelFn&& channel,
                      const Eigen::MatrixXcd& exponent,
                      const OracleSystem& dbl) {
  const int n = n_majorana;
  MajoranaAlgebra sys(n);
  const unsigned nsub = 1u << n;

  std::vector<Eigen::MatrixXcd> mono(nsub);
  std::vector<Eigen::VectorXcd> vec(nsub);
  std::vector<double> norm2(nsub);
  const Eigen::VectorXcd phi = dbl.max_entangled();
  for (unsigned a = 0; a < nsub; ++a) {
    mono[a] = sys.monomial(a).dense();
    PermOp g = PermOp::identity(dbl.dim());
    for (int i = 0; i < n; ++i)
      if (a & (1u << i)) g = g.after(dbl.gamma_q(i));
    vec[a] = g.apply(phi);
    norm2[a] = mono[a].squaredNorm();
  }

  Eigen::MatrixXcd expmat;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(exponent);
    Eigen::VectorXcd e(es.eigenvalues().size());
    for (int k = 0; k < e.size(); ++k) e(k) = std::exp(es.eigenvalues()(k));
    expmat = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
  }

  std::vector<Eigen::VectorXcd> lhs, rhs;
  for (unsigned a = 0; a < nsub; ++a) {
    if (even_only && (std::popcount(a) % 2)) continue;
    const Eigen::MatrixXcd out = channel(sys, mono[a]);
    Eigen::VectorXcd l = Eigen::VectorXcd::Zero(dbl.dim());
    for (unsigned b = 0; b < nsub; ++b) {
      const cplx coeff = (mono[b].adjoint() * out).trace() / norm2[b];
      if (std::abs(coeff) > 1e-15) l += coeff * vec[b];
    }
    lhs.push_back(std::move(l));
    rhs.push_back(expmat * vec[a]);
  }

  cplx num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < lhs.size(); ++i) {
    num += rhs[i].dot(lhs[i]);
    den += rhs[i].squaredNorm();
  }
  const cplx c_opt = num / den;

  double dev = 0.0;
  for (size_t i = 0; i < lhs.size(); ++i)
    dev = std::max(dev, (lhs[i] - c_opt * rhs[i]).cwiseAbs().maxCoeff());
  return dev;
}

Eigen::MatrixXcd doubled_bilinear(const OracleSystem& dbl) {
  // sum_j 2i gamma_j gammabar_j
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(dbl.dim(), dbl.dim());
  for (int j = 0; j < dbl.N(); ++j)
    x += cplx(0.0, 2.0) * (dbl.gamma_q(j).after(dbl.gamma_r(j))).dense();
  return x;
}

}  // namespace

double pair_angle_exact(double q, int n_majorana) {
  return -0.25 * std::log1p(-2.0 * q / n_majorana);
}

double pair_angle_asymptotic(double q, int n_majorana) {
  return -0.5 * std::log1p(-q / n_majorana);
}

double verify_channel_choi(double p, int n_majorana) {
  if (n_majorana < 2 || n_majorana > 8 || n_majorana % 2)
    throw std::invalid_argument("verify_channel_choi: n_majorana must be even, 2..8");
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("verify_channel_choi: p must lie in [0, 1/2)");
  OracleSystem dbl(n_majorana);
  const double phi = -0.5 * std::log1p(-2.0 * p);
  const Eigen::MatrixXcd exponent = phi * doubled_bilinear(dbl);
  auto channel = [p](const MajoranaAlgebra& sys, const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd out = m;
    for (int j = 0; j < sys.n(); ++j)
      out = ((1.0 - p) * out + 2.0 * p * sys.gamma(j).conjugate(out)).eval();
    return out;
  };
  return choi_deviation(n_majorana, /*even_only=*/true, channel, exponent, dbl);
}

double verify_channel_choi_pair(double q, int n_majorana) {
  if (n_majorana < 4 || n_majorana > 8 || n_majorana % 2)
    throw std::invalid_argument("verify_channel_choi_pair: n_majorana must be even, 4..8");
  if (!(q >= 0.0 && q < 0.5 * n_majorana))
    throw std::invalid_argument("verify_channel_choi_pair: need 0 <= q/N < 1/2");
  OracleSystem dbl(n_majorana);
  const Eigen::MatrixXcd x = doubled_bilinear(dbl);
  const Eigen::MatrixXcd exponent = pair_angle_exact(q, n_majorana) * (x * x);
  const double qn = q / n_majorana;
  auto channel = [qn](const MajoranaAlgebra& sys, const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd out = m;
    for (int i = 0; i < sys.n(); ++i)
      for (int j = i + 1; j < sys.n(); ++j) {
        const PermOp op = sys.gamma(i).after(sys.gamma(j));
        out = ((1.0 - qn) * out + 4.0 * qn * op.conjugate(out)).eval();
      }
    return out;
  };
  return choi_deviation(n_majorana, /*even_only=*/false, channel, exponent, dbl);
}

}  // namespace sykci::edoracle

