#include "sykci/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sykci {

ConformalFit fit_conformal(const Eigen::VectorXd& profile, double beta) {
  const int m = static_cast<int>(profile.size());
  const double dt = beta / m;
  std::vector<double> xs, ys;
  for (int d = 1; d < m; ++d) {
    const double tau = d * dt;
    if (tau < 0.2 * beta || tau > 0.8 * beta) continue;
    const double g = profile(d);
    if (!(g > 0.0))
      throw std::runtime_error("fit_conformal: non-positive G inside the fit window");
    xs.push_back(std::log(M_PI / (beta * std::sin(M_PI * tau / beta))));
    ys.push_back(std::log(g));
  }
  if (xs.size() < 3)
    throw std::runtime_error("fit_conformal: too few points in the fit window");
  const int k = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double inter = (sy - slope * sx) / k;
  double ss = 0;
  for (int i = 0; i < k; ++i) {
    const double r = ys[i] - slope * xs[i] - inter;
    ss += r * r;
  }
  ConformalFit f;
  f.delta = 0.5 * slope;
  f.amplitude = std::exp(inter);
  f.residual = std::sqrt(ss / k);
  return f;
}

ConformalFit fit_conformal(const BilocalField& G, double beta) {
  if (G.spec.kind != ContourKind::thermal)
    throw std::invalid_argument("fit_conformal: expects a thermal field");
  const int m = G.spec.nt();
  Eigen::VectorXd prof = Eigen::VectorXd::Zero(m);
  for (int d = 1; d < m; ++d) {
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
      const int j = k + d;
      acc += (j < m) ? G.values(j, k).real() : -G.values(j - m, k).real();
    }
    prof(d) = acc / m;
  }
  return fit_conformal(prof, beta);
}

PerturbativeFit fit_gamma(double beta, const ModelParams& params, int n,
                          const ChannelConfig& cfg) {
  PerturbativeFit fit;
  fit.renyi_n = n;
  fit.fit_window = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
  const double dp = 1e-3;

  // assemble the p list: slope probes, zero, and the quadratic window
  std::vector<double> ps = {-dp, 0.0, dp};
  for (double p : fit.fit_window) ps.push_back(p);

  const int M = replica_grid_M(beta, params, cfg.M, cfg.dtau_target);
  const bool rich = cfg.richardson && M % 4 == 0 && M / 2 >= 8;
  std::vector<double> thetas(ps.size());
  for (size_t i = 0; i < ps.size(); ++i)
    thetas[i] = n * (-0.5) * std::log1p(-2.0 * ps[i]);

  SolverConfig sc = cfg.solver;
  sc.keep_fields = false;
  auto actions = [&](ContourKind kind) {
    auto hi = continuation_solve(build_contour(kind, beta, M), params, thetas, sc);
    std::vector<SolveResult> lo;
    if (rich)
      lo = continuation_solve(build_contour(kind, beta, M / 2), params, thetas, sc);
    std::vector<double> a(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
      if (!hi[i].converged || (rich && !lo[i].converged))
        throw std::runtime_error("fit_gamma: solver did not converge at p = " +
                                 std::to_string(ps[i]));
      a[i] = rich ? 2.0 * hi[i].action - lo[i].action : hi[i].action;
    }
    return a;
  };
  const std::vector<double> aq = actions(q_kind(n));
  const std::vector<double> aqr = actions(qr_kind(n));

  fit.slope_q = (aq[2] - aq[0]) / (2 * dp);
  fit.slope_qr = (aqr[2] - aqr[0]) / (2 * dp);
  const double sq0 = aq[1], sqr0 = aqr[1];

  // quadratic coefficients with the measured linear part removed
  double num_q = 0, num_qr = 0, den = 0, ss = 0;
  for (size_t i = 3; i < ps.size(); ++i) {
    const double p = ps[i];
    const double yq = aq[i] - sq0 - fit.slope_q * p;
    const double yqr = aqr[i] - sqr0 - fit.slope_qr * p;
    num_q += yq * p * p;
    num_qr += yqr * p * p;
    den += p * p * p * p;
  }
  fit.gamma_q = -num_q / den;
  fit.gamma_qr = -num_qr / den;
  for (size_t i = 3; i < ps.size(); ++i) {
    const double p = ps[i];
    const double r = (aq[i] - sq0 - fit.slope_q * p) + fit.gamma_q * p * p;
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / fit.fit_window.size());

  // thermal reference G_{n beta}(beta): grid divisible by n
  {
    ModelParams th = params;
    int mt = default_thermal_M(n * beta, th);
    mt = ((mt + n * 16 - 1) / (n * 16)) * (n * 16);
    SolveResult r = thermal_solve(n * beta, th, sc, mt);
    if (!r.converged)
      throw std::runtime_error("fit_gamma: thermal reference did not converge");
    fit.g_thermal_ref = r.thermal_profile(mt / n);
    fit.slope_predicted = -2.0 * n * fit.g_thermal_ref;
  }
  return fit;
}

Extrapolation extrapolate_zero_T(
    const std::vector<std::pair<double, double>>& beta_y, int order) {
  if (order < 1 || order > 2)
    throw std::invalid_argument("extrapolate_zero_T: order must be 1 or 2");
  const int m = static_cast<int>(beta_y.size());
  const int k = order + 1;
  if (m < k) throw std::invalid_argument("extrapolate_zero_T: not enough points");
  Eigen::MatrixXd X(m, k);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    const double t = 1.0 / beta_y[i].first;
    double pw = 1.0;
    for (int j = 0; j < k; ++j) {
      X(i, j) = pw;
      pw *= t;
    }
    y(i) = beta_y[i].second;
  }
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::VectorXd coef = xtx.ldlt().solve(X.transpose() * y);
  Extrapolation out;
  out.value = coef(0);
  if (m > k) {
    const double ssr = (y - X * coef).squaredNorm() / (m - k);
    out.uncertainty = std::sqrt(ssr * xtx.inverse()(0, 0));
  }
  return out;
}

std::vector<std::pair<double, double>> thermal_entropy_curve(
    const std::vector<double>& betas, const ModelParams& params,
    const SolverConfig& cfg, double rel_step, int M) {
  SolverConfig sc = cfg;
  sc.keep_fields = false;
  std::vector<std::pair<double, double>> out;
  for (double b : betas) {
    const int m = (M > 0) ? M : default_thermal_M(b, params);
    const double db = rel_step * b;
    const double am = free_energy_density(b - db, params, sc, m);
    const double a0 = free_energy_density(b, params, sc, m);
    const double ap = free_energy_density(b + db, params, sc, m);
    const double da = (ap - am) / (2 * db);
    out.push_back({b, b * da - a0});
  }
  return out;
}

ThresholdPoint epsilon_threshold(
    const std::vector<std::pair<double, double>>& curve, double clean,
    double epsilon) {
  if (curve.size() < 2)
    throw std::invalid_argument("epsilon_threshold: need at least two points");
  const double slack = 1e-9 + 1e-6 * std::abs(clean);
  for (size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].first <= curve[i - 1].first)
      throw std::invalid_argument("epsilon_threshold: rates must increase");
    if (curve[i].second > curve[i - 1].second + slack)
      throw std::invalid_argument("epsilon_threshold: curve is not non-increasing");
  }
  const double cut = (1.0 - epsilon) * clean;
  if (curve.back().second >= cut) return {curve.back().first, true};
  if (curve.front().second < cut) return {curve.front().first, false};
  size_t i = 0;
  while (i + 1 < curve.size() && curve[i + 1].second >= cut) ++i;
  const auto [r0, v0] = curve[i];
  const auto [r1, v1] = curve[i + 1];
  const double t = (v0 - cut) / (v0 - v1);
  return {r0 + t * (r1 - r0), false};
}

SsbOnset detect_ssb_onset(const std::vector<std::pair<double, double>>& scan,
                          double ssb_tol,
                          const std::function<double(double)>& phi_star_of_q) {
  for (size_t i = 1; i < scan.size(); ++i)
    if (scan[i].first <= scan[i - 1].first)
      throw std::invalid_argument("detect_ssb_onset: scan must be sorted in q");
  size_t first = scan.size();
  for (size_t i = 0; i < scan.size(); ++i)
    if (scan[i].second > ssb_tol) {
      first = i;
      break;
    }
  if (first == scan.size()) return {scan.back().first, true};
  if (first == 0) return {scan.front().first, false};
  double lo = scan[first - 1].first, hi = scan[first].first;
  if (phi_star_of_q) {
    for (int it = 0; it < 12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi_star_of_q(mid) > ssb_tol)
        hi = mid;
      else
        lo = mid;
    }
  }
  return {0.5 * (lo + hi), false};
}

SsbOnset ssb_spinodal(const std::vector<std::pair<double, double>>& scan,
                      double phi_fit_max) {
  std::vector<double> xs, ys;  // 1/q, 1/phi*
  for (auto [q, phi] : scan)
    if (phi > 0.0 && phi <= phi_fit_max) {
      xs.push_back(1.0 / q);
      ys.push_back(1.0 / phi);
    }
  if (xs.size() < 2) return {scan.empty() ? 0.0 : scan.back().first, true};
  const int k = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double a = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double b = (sy - a * sx) / k;
  if (!(a > 0.0) || !(b < 0.0))
    return {scan.back().first, true};  // no divergence in range
  return {-a / b, false};
}

SsbOnset detect_ssb_transition(
    const std::vector<std::pair<double, double>>& scan,
    const std::function<double(double)>& phi_star_of_q, int bisections) {
  if (scan.size() < 3)
    throw std::invalid_argument("detect_ssb_transition: need at least 3 points");
  size_t ij = 0;
  double jump = -1.0;
  for (size_t i = 0; i + 1 < scan.size(); ++i) {
    const double dq = scan[i + 1].first - scan[i].first;
    const double d = (scan[i + 1].second - scan[i].second) / dq;
    if (d > jump) {
      jump = d;
      ij = i;
    }
  }
  if (jump <= 0.0) return {scan.back().first, true};
  double lo = scan[ij].first, hi = scan[ij + 1].first;
  double flo = scan[ij].second, fhi = scan[ij + 1].second;
  if (phi_star_of_q) {
    for (int it = 0; it < bisections; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = phi_star_of_q(mid);
      // keep the half that contains the larger part of the rise
      if (fm - flo > fhi - fm) {
        hi = mid;
        fhi = fm;
      } else {
        lo = mid;
        flo = fm;
      }
    }
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace sykci
