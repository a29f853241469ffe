#include "sykci/solver.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>

#include "sykci/detail/raw_closures.hpp"

namespace sykci {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;
template <class T>
using Mat = detail::Mat<T>;

// Damped or Anderson-accelerated fixed-point updates on flattened fields.
// Falls back to plain damping whenever the residual history misbehaves.
template <class Scalar>
class Updater {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  double x_;
  bool accel_;
  static constexpr int kDepth = 3;
  std::vector<Vec> dg_, dr_;
  Vec g_prev_, r_prev_;
  bool has_prev_ = false;
  double best_res_ = std::numeric_limits<double>::infinity();

 public:
  Updater(double mixing, bool accel) : x_(mixing), accel_(accel) {}

  Vec step(const Vec& g, const Vec& fg, double resid) {
    Vec r = fg - g;
    if (!accel_) return g + x_ * r;
    if (resid > 5.0 * best_res_ || !std::isfinite(resid)) {
      dg_.clear();
      dr_.clear();
      has_prev_ = false;
      best_res_ = std::numeric_limits<double>::infinity();
    }
    best_res_ = std::min(best_res_, resid);
    if (has_prev_) {
      dg_.push_back(g - g_prev_);
      dr_.push_back(r - r_prev_);
      if (static_cast<int>(dg_.size()) > kDepth) {
        dg_.erase(dg_.begin());
        dr_.erase(dr_.begin());
      }
    }
    g_prev_ = g;
    r_prev_ = r;
    has_prev_ = true;
    const int k = static_cast<int>(dg_.size());
    if (k == 0) return g + x_ * r;

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A(k, k);
    Vec b(k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        const Scalar v = dr_[i].dot(dr_[j]);
        A(i, j) = v;
        A(j, i) = Eigen::numext::conj(v);
      }
      b(i) = dr_[i].dot(r);
    }
    const double reg = 1e-12 * std::abs(Eigen::numext::real(A.trace())) + 1e-300;
    for (int i = 0; i < k; ++i) A(i, i) += Scalar(reg);
    Vec theta = A.ldlt().solve(b);
    if (!theta.allFinite() || theta.template lpNorm<Eigen::Infinity>() > 20.0)
      return g + x_ * r;
    Vec out = g + r;
    for (int i = 0; i < k; ++i) out -= theta(i) * (dg_[i] + dr_[i]);
    return out;
  }
};

MatrixXd free_block(int nt) {
  MatrixXd g(nt, nt);
  for (int j = 0; j < nt; ++j)
    for (int k = 0; k < nt; ++k) g(j, k) = (j == k) ? 0.0 : ((j > k) ? 0.5 : -0.5);
  return g;
}

template <class T>
double checked_logdet(Eigen::PartialPivLU<Mat<T>>& lu, int iteration) {
  double logdet = 0.0, min_piv = 1e300, max_piv = 0.0;
  const auto& LU = lu.matrixLU();
  for (int i = 0; i < LU.rows(); ++i) {
    const double a = std::abs(LU(i, i));
    min_piv = std::min(min_piv, a);
    max_piv = std::max(max_piv, a);
    logdet += std::log(a);
  }
  if (!(min_piv > 1e-13 * max_piv))
    throw SingularKernelError("singular kernel during inversion at iteration " +
                              std::to_string(iteration));
  return logdet;
}

template <class T>
void project_antisymmetric(Mat<T>& a) {
  a = 0.5 * (a - a.transpose()).eval();
}

// Translation-averaged profile G(tau_d) of a thermal solution.
VectorXd profile_from_matrix(const MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  VectorXd prof = VectorXd::Zero(n);
  for (int d = 1; d < n; ++d) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int j = k + d;
      acc += (j < n) ? G(j, k) : -G(j - n, k);  // antiperiodic wrap
    }
    prof(d) = acc / n;
  }
  return prof;
}

BilocalField make_field(const ContourSpec& spec, MatrixXcd v) {
  BilocalField f;
  f.spec = spec;
  f.values = std::move(v);
  return f;
}

// ---------------------------------------------------------------------------
// Generic dense path.

template <class T>
SolveResult dense_solve(const ContourSpec& spec, const ModelParams& params,
                        double theta, const SolverConfig& cfg) {
  const int dim = spec.dim();
  const int nt = spec.nt();
  const double dt = spec.dtau();
  const double dt2 = dt * dt;

  MatrixXd g0r = MatrixXd::Zero(dim, dim);
  {
    MatrixXd blk = free_block(nt);
    for (int f = 0; f < spec.flavors; ++f)
      g0r.block(f * nt, f * nt, nt, nt) = blk;
  }
  Mat<T> G0 = g0r.template cast<T>();
  Mat<T> K0;
  {
    Eigen::PartialPivLU<Mat<T>> lu(G0);
    K0 = lu.inverse() / dt2;
  }

  std::vector<std::pair<std::pair<int, int>, T>> vertex;
  for (const auto& e : spec.vertex_entries) {
    const cplx c = theta * e.coeff;
    if constexpr (std::is_same_v<T, double>) {
      if (std::abs(c.imag()) > 0.0)
        throw std::logic_error("dense_solve<double>: complex vertex requires the complex path");
      vertex.push_back({{e.row, e.col}, c.real()});
    } else {
      vertex.push_back({{e.row, e.col}, c});
    }
  }

  Mat<T> G;
  if (cfg.warm_start && cfg.warm_start->values.rows() == dim) {
    if constexpr (std::is_same_v<T, double>)
      G = cfg.warm_start->values.real();
    else
      G = cfg.warm_start->values;
  } else {
    G = G0;
  }
  project_antisymmetric(G);

  Updater<T> upd(cfg.mixing, cfg.acceleration);
  Mat<T> Sig, K, Gdy;
  double boson_ld = 0.0;
  double resid = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  bool clamped = false;
  using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    detail::model_sigma_raw(G, spec, params, Sig, &boson_ld, &clamped);
    K = K0 - Sig;
    for (const auto& [rc, c] : vertex) K(rc.first, rc.second) -= c;
    Eigen::PartialPivLU<Mat<T>> lu(K);
    checked_logdet(lu, it);
    Gdy = lu.inverse() / dt2;
    project_antisymmetric(Gdy);
    resid = (Gdy - G).cwiseAbs().maxCoeff();
    if (!std::isfinite(resid)) break;
    if (resid <= cfg.tolerance && !clamped) {
      G = Gdy;
      converged = true;
      break;
    }
    VecT next = upd.step(VecT::Map(G.data(), G.size()),
                         VecT::Map(Gdy.data(), Gdy.size()), resid);
    G = Mat<T>::Map(next.data(), dim, dim);
    project_antisymmetric(G);
  }

  detail::model_sigma_raw(G, spec, params, Sig, &boson_ld, &clamped);
  converged = converged && !clamped;

  // action with the regularized log-det (B-form keeps the free part exact)
  double action;
  {
    Mat<T> S = Sig;
    for (const auto& [rc, c] : vertex) S(rc.first, rc.second) += c;
    Mat<T> B = Mat<T>::Identity(dim, dim) - dt2 * (G0 * S).eval();
    Eigen::PartialPivLU<Mat<T>> lu(B);
    action = -0.5 * checked_logdet(lu, it) + spec.free_action();
    const cplx sg = cplx((Sig.array() * G.array()).sum());
    action += 0.5 * dt2 * sg.real();
    if (params.model == Model::syk) {
      cplx g4 = 0.0;
      for (int j = 0; j < dim; ++j) {
        if (!spec.hamiltonian_mask[j % nt]) continue;
        for (int k = 0; k < dim; ++k) {
          if (!spec.hamiltonian_mask[k % nt]) continue;
          const T g = G(j, k);
          g4 += cplx(g * g * g * g);
        }
      }
      action -= (params.J * params.J / 8.0) * dt2 * g4.real();
    } else {
      action += 0.25 * lowrank_closure_constant() * params.rank_gamma * boson_ld;
    }
  }

  SolveResult r;
  r.action = action;
  r.iterations = std::min(it, cfg.max_iterations);
  r.residual = resid;
  r.converged = converged;
  if (spec.kind == ContourKind::thermal) {
    if constexpr (std::is_same_v<T, double>)
      r.thermal_profile = profile_from_matrix(G);
    else
      r.thermal_profile = profile_from_matrix(G.real());
  }
  if (cfg.keep_fields) {
    r.G = make_field(spec, G.template cast<cplx>());
    r.Sigma = make_field(spec, Sig.template cast<cplx>());
  } else {
    r.G.spec = spec;
    r.Sigma.spec = spec;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Spectral path for the translation-invariant thermal contour. Fermion
// frequencies are odd, the low-rank boson lives on even frequencies.

struct OddTransform {
  int M;
  Eigen::FFT<double> fft;
  VectorXcd tw;  // exp(-i pi d / M)
  explicit OddTransform(int m) : M(m), tw(m) {
    for (int d = 0; d < m; ++d) {
      const double ph = M_PI * d / m;
      tw(d) = cplx(std::cos(ph), -std::sin(ph));
    }
  }
  VectorXcd forward(const VectorXd& f) {
    VectorXcd y(M), out(M);
    for (int d = 0; d < M; ++d) y(d) = f(d) * tw(d);
    fft.fwd(out, y);
    return out;
  }
  VectorXd backward(const VectorXcd& lam) {
    VectorXcd z(M);
    fft.inv(z, lam);
    VectorXd f(M);
    for (int d = 0; d < M; ++d) f(d) = (z(d) * std::conj(tw(d))).real();
    return f;
  }
};

// Sigma profile and boson trace-log for the low-rank closure. Soft boson
// modes are clamped at a positive floor while the iterate is still on the
// unstable side of criticality.
void lowrank_sigma_profile(const VectorXd& Ghat, double g2, double cgamma,
                           double dt, Eigen::FFT<double>& fft, VectorXd& Sighat,
                           double* boson_ld, bool* clamped) {
  const int M = static_cast<int>(Ghat.size());
  VectorXcd pihat(M);
  for (int d = 0; d < M; ++d) pihat(d) = Ghat(d) * Ghat(d);
  VectorXcd lam_pi(M);
  fft.fwd(lam_pi, pihat);
  VectorXcd inv_den(M);
  double ld = 0.0;
  bool any = false;
  for (int m = 0; m < M; ++m) {
    double den = 1.0 - g2 * dt * lam_pi(m).real();
    if (den < 1e-8) {
      den = 1e-8;
      any = true;
    }
    inv_den(m) = 1.0 / den;
    ld += std::log(den);
  }
  if (boson_ld) *boson_ld = ld;
  if (clamped) *clamped = any;
  VectorXcd binv(M);
  fft.inv(binv, inv_den);
  Sighat.resize(M);
  for (int d = 0; d < M; ++d)
    Sighat(d) = cgamma * (g2 / dt) * binv(d).real() * Ghat(d);
}

SolveResult spectral_thermal(const ContourSpec& spec, const ModelParams& params,
                             const SolverConfig& cfg) {
  const int M = spec.grid_per_beta;
  const double dt = spec.dtau();
  const double dt2 = dt * dt;
  OddTransform tr(M);
  Eigen::FFT<double> boson_fft;

  VectorXcd lamG0(M);
  for (int m = 0; m < M; ++m) {
    const double w = M_PI * (2 * m + 1) / M;
    lamG0(m) = cplx(0.0, -0.5 / std::tan(0.5 * w));
  }

  VectorXd Ghat(M);
  Ghat(0) = 0.0;
  for (int d = 1; d < M; ++d) Ghat(d) = 0.5;

  const double cgamma = lowrank_closure_constant() * params.rank_gamma;
  const double g2 = params.g * params.g;
  const double J2 = params.J * params.J;

  bool clamped = false;
  auto sigma_profile = [&](const VectorXd& gh, VectorXd& sh, double* bld) {
    if (params.model == Model::syk) {
      sh = J2 * gh.array().cube();
      if (bld) *bld = 0.0;
      clamped = false;
    } else {
      lowrank_sigma_profile(gh, g2, cgamma, dt, boson_fft, sh, bld, &clamped);
    }
  };

  Updater<double> upd(cfg.mixing, cfg.acceleration);
  VectorXd Sighat;
  double boson_ld = 0.0;
  double resid = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  for (it = 1; it <= cfg.max_iterations; ++it) {
    sigma_profile(Ghat, Sighat, nullptr);
    VectorXcd lamSig = tr.forward(Sighat);
    VectorXcd lamG(M);
    for (int m = 0; m < M; ++m)
      lamG(m) = lamG0(m) / (1.0 - dt2 * lamSig(m) * lamG0(m));
    VectorXd Gnew = tr.backward(lamG);
    Gnew(0) = 0.0;
    for (int d = 1; d <= M / 2; ++d) {
      const double s = 0.5 * (Gnew(d) + Gnew(M - d));
      Gnew(d) = s;
      Gnew(M - d) = s;
    }
    resid = (Gnew - Ghat).cwiseAbs().maxCoeff();
    if (!std::isfinite(resid)) break;
    if (resid <= cfg.tolerance && !clamped) {
      Ghat = Gnew;
      converged = true;
      break;
    }
    Ghat = upd.step(Ghat, Gnew, resid);
    Ghat(0) = 0.0;
    for (int d = 1; d <= M / 2; ++d) {
      const double s = 0.5 * (Ghat(d) + Ghat(M - d));
      Ghat(d) = s;
      Ghat(M - d) = s;
    }
  }

  sigma_profile(Ghat, Sighat, &boson_ld);
  converged = converged && !clamped;
  VectorXcd lamSig = tr.forward(Sighat);
  double logdet = 0.0;
  for (int m = 0; m < M; ++m)
    logdet += std::log(std::abs(1.0 - dt2 * lamSig(m) * lamG0(m)));

  double action = -0.5 * logdet + spec.free_action() +
                  M * dt2 * 0.5 * Sighat.dot(Ghat);
  if (params.model == Model::syk)
    action -= (J2 / 8.0) * M * dt2 * Ghat.array().pow(4).sum();
  else
    action += 0.25 * cgamma * boson_ld;

  SolveResult r;
  r.action = action;
  r.iterations = std::min(it, cfg.max_iterations);
  r.residual = resid;
  r.converged = converged;
  r.thermal_profile = Ghat;
  r.G.spec = spec;
  r.Sigma.spec = spec;
  if (cfg.keep_fields) {
    MatrixXcd G(M, M), S(M, M);
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k) {
        const int d = ((j - k) % M + M) % M;
        const double sgn = (j >= k) ? 1.0 : -1.0;
        G(j, k) = sgn * Ghat(d);
        S(j, k) = sgn * Sighat(d);
      }
    r.G.values = std::move(G);
    r.Sigma.values = std::move(S);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Two-replica contour with the equal-time inter-replica vertex. In the basis
// where the imaginary pairing becomes real the kernel is block-circulant, so
// the solve splits into two real problems of half the size.

SolveResult renyi2qr_pair(const ContourSpec& spec, const ModelParams& params,
                          double theta, const SolverConfig& cfg) {
  const int nt = spec.nt();
  const int M = spec.grid_per_beta;
  const double dt = spec.dtau();
  const double dt2 = dt * dt;
  const auto& mask = spec.hamiltonian_mask;

  MatrixXd G0 = free_block(nt);
  MatrixXd K0;
  {
    Eigen::PartialPivLU<MatrixXd> lu(G0);
    K0 = lu.inverse() / dt2;
  }

  // rotated equal-time vertex: +|coeff| theta on the window diagonal
  VectorXd vdiag = VectorXd::Zero(nt);
  for (const auto& e : spec.vertex_entries)
    if (e.row < nt)  // flavor-0 row entry carries -i mag
      vdiag(e.row) += theta * (-e.coeff.imag());

  MatrixXd Gd = G0, Go = MatrixXd::Zero(nt, nt);
  if (cfg.warm_start && cfg.warm_start->values.rows() == spec.dim()) {
    Gd = cfg.warm_start->values.topLeftCorner(nt, nt).real();
    Go = -cfg.warm_start->values.topRightCorner(nt, nt).imag();
  }

  const double J2 = params.J * params.J;
  const double g2 = params.g * params.g;
  const double cgamma = lowrank_closure_constant() * params.rank_gamma;

  MatrixXd Sd(nt, nt), So(nt, nt);
  double boson_ld = 0.0;
  bool clamped = false;
  auto inv_clamped = [&](MatrixXd b, double* ld) {
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(b);
    Eigen::VectorXd inv_ev(nt);
    for (int i = 0; i < nt; ++i) {
      double ev = es.eigenvalues()(i);
      if (ev < 1e-8) {
        ev = 1e-8;
        clamped = true;
      }
      if (ld) *ld += std::log(ev);
      inv_ev(i) = 1.0 / ev;
    }
    return MatrixXd(es.eigenvectors() * inv_ev.asDiagonal() *
                    es.eigenvectors().transpose());
  };
  auto closures = [&](const MatrixXd& gd, const MatrixXd& go, double* bld) {
    clamped = false;
    if (params.model == Model::syk) {
      for (int j = 0; j < nt; ++j)
        for (int k = 0; k < nt; ++k) {
          const bool on = mask[j] && mask[k];
          const double a = gd(j, k), b = go(j, k);
          Sd(j, k) = on ? J2 * a * a * a : 0.0;
          So(j, k) = on ? -J2 * b * b * b : 0.0;
        }
      if (bld) *bld = 0.0;
      return;
    }
    // low-rank: boson blocks split the same way as the fermion kernel,
    // Pi_diag = Gd^2, Pi_off = -Go^2 in the rotated basis
    MatrixXd Bp(nt, nt), Bm(nt, nt);
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < nt; ++k) {
        const bool on = mask[j] && mask[k];
        const double pd = on ? gd(j, k) * gd(j, k) : 0.0;
        const double po = on ? go(j, k) * go(j, k) : 0.0;
        Bp(j, k) = -(g2 * dt) * (pd - po);
        Bm(j, k) = -(g2 * dt) * (pd + po);
      }
    Bp.diagonal().array() += 1.0;
    Bm.diagonal().array() += 1.0;
    if (bld) *bld = 0.0;
    MatrixXd Dp = inv_clamped(Bp, bld) * (g2 / dt);
    MatrixXd Dm = inv_clamped(Bm, bld) * (g2 / dt);
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < nt; ++k) {
        const bool on = mask[j] && mask[k];
        const double dd = 0.5 * (Dp(j, k) + Dm(j, k));
        const double dof = 0.5 * (Dp(j, k) - Dm(j, k));
        Sd(j, k) = on ? cgamma * dd * gd(j, k) : 0.0;
        So(j, k) = on ? cgamma * dof * go(j, k) : 0.0;
      }
  };

  Updater<double> upd(cfg.mixing, cfg.acceleration);
  double resid = std::numeric_limits<double>::infinity();
  int it = 0;
  bool converged = false;
  MatrixXd Sp, Sm, Gp, Gm;
  VectorXd cur(2 * nt * nt), img(2 * nt * nt);
  for (it = 1; it <= cfg.max_iterations; ++it) {
    closures(Gd, Go, nullptr);
    Sp = Sd + So;
    Sp.diagonal() += vdiag;
    Sm = Sd - So;
    Sm.diagonal() -= vdiag;
    MatrixXd Kp = K0 - Sp, Km = K0 - Sm;
    Eigen::PartialPivLU<MatrixXd> lup(Kp), lum(Km);
    checked_logdet(lup, it);
    checked_logdet(lum, it);
    Gp = lup.inverse() / dt2;
    Gm = lum.inverse() / dt2;
    MatrixXd Gdn = 0.5 * (Gp + Gm), Gon = 0.5 * (Gp - Gm);
    project_antisymmetric(Gdn);
    Gon = 0.5 * (Gon + Gon.transpose()).eval();
    resid = std::max((Gdn - Gd).cwiseAbs().maxCoeff(),
                     (Gon - Go).cwiseAbs().maxCoeff());
    if (!std::isfinite(resid)) break;
    if (resid <= cfg.tolerance && !clamped) {
      Gd = Gdn;
      Go = Gon;
      converged = true;
      break;
    }
    cur << VectorXd::Map(Gd.data(), nt * nt), VectorXd::Map(Go.data(), nt * nt);
    img << VectorXd::Map(Gdn.data(), nt * nt), VectorXd::Map(Gon.data(), nt * nt);
    VectorXd next = upd.step(cur, img, resid);
    Gd = MatrixXd::Map(next.data(), nt, nt);
    Go = MatrixXd::Map(next.data() + nt * nt, nt, nt);
    project_antisymmetric(Gd);
    Go = 0.5 * (Go + Go.transpose()).eval();
  }

  closures(Gd, Go, &boson_ld);
  converged = converged && !clamped;
  Sp = Sd + So;
  Sp.diagonal() += vdiag;
  Sm = Sd - So;
  Sm.diagonal() -= vdiag;

  double action;
  {
    MatrixXd Bp = MatrixXd::Identity(nt, nt) - dt2 * (G0 * Sp);
    MatrixXd Bm = MatrixXd::Identity(nt, nt) - dt2 * (G0 * Sm);
    Eigen::PartialPivLU<MatrixXd> lup(Bp), lum(Bm);
    action = -0.5 * (checked_logdet(lup, it) + checked_logdet(lum, it)) +
             spec.free_action();
    action += dt2 * ((Sd.array() * Gd.array()).sum() -
                     (So.array() * Go.array()).sum());
    if (params.model == Model::syk) {
      double g4 = 0.0;
      for (int j = 0; j < nt; ++j) {
        if (!mask[j]) continue;
        for (int k = 0; k < nt; ++k) {
          if (!mask[k]) continue;
          const double a = Gd(j, k), b = Go(j, k);
          g4 += a * a * a * a + b * b * b * b;
        }
      }
      action -= (J2 / 4.0) * dt2 * g4;
    } else {
      action += 0.25 * cgamma * boson_ld;
    }
  }

  SolveResult r;
  r.action = action;
  r.iterations = std::min(it, cfg.max_iterations);
  r.residual = resid;
  r.converged = converged;
  r.G.spec = spec;
  r.Sigma.spec = spec;
  if (cfg.keep_fields) {
    const cplx mi(0.0, -1.0);
    MatrixXcd G(2 * nt, 2 * nt), S(2 * nt, 2 * nt);
    G.topLeftCorner(nt, nt) = Gd;
    G.bottomRightCorner(nt, nt) = Gd;
    G.topRightCorner(nt, nt) = mi * Go;
    G.bottomLeftCorner(nt, nt) = -mi * Go.transpose();
    S.topLeftCorner(nt, nt) = Sd;
    S.bottomRightCorner(nt, nt) = Sd;
    // undo the rotation: off-diagonal blocks pick up -i
    S.topRightCorner(nt, nt) = mi * So;
    S.bottomLeftCorner(nt, nt) = -mi * So.transpose();
    r.G.values = std::move(G);
    r.Sigma.values = std::move(S);
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

SolveResult solve(const ContourSpec& spec, const ModelParams& params,
                  double theta, const SolverConfig& cfg) {
  if (!std::isfinite(theta)) throw std::invalid_argument("solve: theta must be finite");
  if (params.model == Model::lowrank) params.validate();

  const bool has_imag_vertex =
      spec.kind == ContourKind::renyi2_qr && theta != 0.0;
  if (!cfg.force_generic) {
    if (spec.kind == ContourKind::thermal) return spectral_thermal(spec, params, cfg);
    if (has_imag_vertex) return renyi2qr_pair(spec, params, theta, cfg);
  }
  if (has_imag_vertex) return dense_solve<cplx>(spec, params, theta, cfg);
  return dense_solve<double>(spec, params, theta, cfg);
}

std::vector<SolveResult> continuation_solve(const ContourSpec& spec,
                                            const ModelParams& params,
                                            const std::vector<double>& thetas,
                                            const SolverConfig& cfg) {
  std::vector<SolveResult> out;
  out.reserve(thetas.size());
  SolverConfig c = cfg;
  c.keep_fields = true;
  std::optional<BilocalField> warm = cfg.warm_start;
  for (double th : thetas) {
    c.warm_start = warm;
    SolveResult r;
    try {
      r = solve(spec, params, th, c);
    } catch (const SingularKernelError&) {
      r.G.spec = spec;
      r.Sigma.spec = spec;
      r.converged = false;
      r.action = std::numeric_limits<double>::quiet_NaN();
    }
    if (r.converged) warm = r.G;
    if (!cfg.keep_fields) {
      r.G.values.resize(0, 0);
      r.Sigma.values.resize(0, 0);
    }
    out.push_back(std::move(r));
  }
  return out;
}

int default_thermal_M(double beta, const ModelParams& params) {
  const double scale = std::max(params.coupling_scale(), 1e-12);
  int m = static_cast<int>(std::ceil(beta * scale / 0.025 / 16.0)) * 16;
  return std::clamp(m, 256, 8192);
}

SolveResult thermal_solve(double beta, const ModelParams& params,
                          const SolverConfig& cfg, int M) {
  if (M == 0) M = default_thermal_M(beta, params);
  return solve(build_contour(ContourKind::thermal, beta, M), params, 0.0, cfg);
}

double free_energy_density(double beta, const ModelParams& params,
                           const SolverConfig& cfg, int M, bool richardson) {
  if (!(beta > 0.0)) throw std::invalid_argument("free_energy_density: beta must be positive");
  SolverConfig c = cfg;
  c.keep_fields = false;
  if (M == 0) M = default_thermal_M(beta, params);
  SolveResult r = thermal_solve(beta, params, c, M);
  if (!r.converged)
    throw std::runtime_error("free_energy_density: solver did not converge");
  if (!richardson || M % 2 || M / 2 < 128) return r.action;
  SolveResult lo = thermal_solve(beta, params, c, M / 2);
  if (!lo.converged)
    throw std::runtime_error("free_energy_density: solver did not converge");
  return 2.0 * r.action - lo.action;
}

double dyson_residual(const SolveResult& r, const ModelParams& params,
                      double theta) {
  const ContourSpec& spec = r.G.spec;
  const int dim = spec.dim();
  if (r.G.values.rows() != dim)
    throw std::invalid_argument("dyson_residual: result carries no fields");
  const double dt2 = spec.dtau() * spec.dtau();
  MatrixXcd G0 = MatrixXcd::Zero(dim, dim);
  {
    MatrixXd blk = free_block(spec.nt());
    for (int f = 0; f < spec.flavors; ++f)
      G0.block(f * spec.nt(), f * spec.nt(), spec.nt(), spec.nt()) =
          blk.cast<cplx>();
  }
  MatrixXcd S = r.Sigma.values;
  for (const auto& e : spec.vertex_entries) S(e.row, e.col) += theta * e.coeff;
  MatrixXcd B = MatrixXcd::Identity(dim, dim) - dt2 * (G0 * S);
  return (B * r.G.values - G0).cwiseAbs().maxCoeff();
}

}  // namespace sykci
