#include "sykci/channels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "sykci/edoracle.hpp"

namespace sykci {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int grid_for(double beta, const ModelParams& p, const ChannelConfig& cfg) {
  return replica_grid_M(beta, p, cfg.M, cfg.dtau_target);
}

bool can_refine_grid(int M) { return M % 4 == 0 && M / 2 >= 8; }

// Rolling warm-started evaluator of s~ at insertion strength theta = n*arg,
// with optional two-grid extrapolation of the 1/M vertex error.
struct DiagramEvaluator {
  ContourKind kind;
  double beta;
  int M;
  bool richardson;
  ModelParams params;
  int n;
  SolverConfig sc;
  std::optional<BilocalField> warm_hi, warm_lo;
  std::map<double, double> memo;

  DiagramEvaluator(ContourKind k, double b, int m, const ModelParams& p, int nn,
                   const SolverConfig& s, bool rich)
      : kind(k), beta(b), M(m), richardson(rich && can_refine_grid(m)),
        params(p), n(nn), sc(s) {}

  double solve_one(int m, std::optional<BilocalField>& warm, double theta) {
    SolverConfig c = sc;
    c.keep_fields = true;
    c.warm_start = warm;
    try {
      SolveResult r = solve(build_contour(kind, beta, m), params, theta, c);
      if (r.converged) {
        warm = r.G;
        return r.action;
      }
    } catch (const SingularKernelError&) {
    }
    return kNaN;
  }

  double operator()(double arg) {
    auto it = memo.find(arg);
    if (it != memo.end()) return it->second;
    double val = solve_one(M, warm_hi, n * arg);
    if (richardson && std::isfinite(val)) {
      const double lo = solve_one(M / 2, warm_lo, n * arg);
      val = std::isfinite(lo) ? 2.0 * val - lo : kNaN;
    }
    memo[arg] = val;
    return val;
  }
};

struct HsMin {
  double phi_star = 0.0;
  double value = kNaN;
  bool ok = false;
};

// Minimize f(phi) = pen phi^2 + s(phi) over phi >= 0. Starts from the grid
// minimum, optionally refines by golden section with exact evaluations, and
// finishes with the parabola through the best three samples.
HsMin minimize_hs(const std::vector<double>& phis,
                  const std::vector<double>& svals, double pen,
                  const std::function<double(double)>& eval, int budget) {
  std::vector<std::pair<double, double>> samples;  // (phi, f)
  for (size_t i = 0; i < phis.size(); ++i)
    if (std::isfinite(svals[i]))
      samples.push_back({phis[i], pen * phis[i] * phis[i] + svals[i]});
  HsMin out;
  if (samples.empty()) return out;

  size_t im = 0;
  for (size_t i = 1; i < samples.size(); ++i)
    if (samples[i].second < samples[im].second) im = i;
  double a = (im > 0) ? samples[im - 1].first : samples[im].first;
  double b = (im + 1 < samples.size()) ? samples[im + 1].first : samples[im].first;

  if (eval && budget > 0 && b > a) {
    auto f_of = [&](double phi) {
      const double s = eval(phi);
      const double f = std::isfinite(s) ? pen * phi * phi + s : kNaN;
      if (std::isfinite(f)) samples.push_back({phi, f});
      return f;
    };
    const double gr = 0.618033988749895;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f_of(c), fd = f_of(d);
    for (int k = 2; k < budget && std::isfinite(fc) && std::isfinite(fd); ++k) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = f_of(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = f_of(d);
      }
    }
  }

  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end(),
                            [](auto& x, auto& y) { return x.first == y.first; }),
                samples.end());
  size_t ib = 0;
  for (size_t i = 1; i < samples.size(); ++i)
    if (samples[i].second < samples[ib].second) ib = i;

  out.ok = true;
  out.phi_star = std::max(0.0, samples[ib].first);
  out.value = samples[ib].second;
  if (ib > 0 && ib + 1 < samples.size()) {
    const auto [x1, f1] = samples[ib - 1];
    const auto [x2, f2] = samples[ib];
    const auto [x3, f3] = samples[ib + 1];
    const double d21 = (f2 - f1) / (x2 - x1), d32 = (f3 - f2) / (x3 - x2);
    const double curv = (d32 - d21) / (x3 - x1);
    if (curv > 0.0) {
      const double xv = 0.5 * (x1 + x2 - d21 / curv);
      if (xv >= x1 && xv <= x3) {
        const double fv = f1 + d21 * (xv - x1) + curv * (xv - x1) * (xv - x2);
        if (fv < out.value) {
          out.phi_star = std::max(0.0, xv);
          out.value = fv;
        }
      }
    }
  }
  return out;
}

// Shared implementation: minimize pen phi^2 + s~(phi + phi0) for both
// diagrams; phi0 > 0 adds a parity-breaking background.
EntropyResult conserving_impl(double beta, const ModelParams& params,
                              double phi0, double q, int n,
                              const ChannelConfig& cfg,
                              const std::vector<double>& phi_grid,
                              DiagramEvaluator* shared_q,
                              DiagramEvaluator* shared_qr,
                              const ActionTable* shared_table) {
  if (!(q > 0.0))
    throw std::invalid_argument("entropies_conserving: q must be positive");

  std::vector<double> grid =
      phi_grid.empty() ? default_phi_grid(cfg.phi_points, cfg.phi_max) : phi_grid;

  ActionTable local;
  const ActionTable* t = shared_table;
  if (!t) {
    std::vector<double> shifted(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) shifted[i] = grid[i] + phi0;
    local = build_action_table(beta, params, n, shifted, cfg);
    local.phi = grid;  // rebase on the HS variable
    t = &local;
  }

  const int M = grid_for(beta, params, cfg);
  DiagramEvaluator local_q(q_kind(n), beta, M, params, n, cfg.solver, cfg.richardson);
  DiagramEvaluator local_qr(qr_kind(n), beta, M, params, n, cfg.solver, cfg.richardson);
  DiagramEvaluator& eq = shared_q ? *shared_q : local_q;
  DiagramEvaluator& eqr = shared_qr ? *shared_qr : local_qr;

  const double pen = n / (2.0 * q);
  auto ev_q = [&](double phi) { return eq(phi + phi0); };
  auto ev_qr = [&](double phi) { return eqr(phi + phi0); };
  HsMin mq = minimize_hs(t->phi, t->s_q, pen, ev_q, cfg.refine_solves);
  HsMin mqr = minimize_hs(t->phi, t->s_qr, pen, ev_qr, cfg.refine_solves);
  if (!mq.ok || !mqr.ok)
    throw std::runtime_error("entropies_conserving: no converged phi points");

  EntropyResult r;
  r.renyi_n = n;
  r.s_q = mq.value;
  r.s_qr = mqr.value;
  r.ic_density = (r.s_q - r.s_qr) / (n - 1);
  r.phi_star = mq.phi_star;
  r.ssb = r.phi_star > cfg.ssb_tol;
  return r;
}

}  // namespace

double phi_of_p(double p) {
  if (!(p < 0.5) || !std::isfinite(p))
    throw std::invalid_argument("phi_of_p: p must lie below 1/2");
  return -0.5 * std::log1p(-2.0 * p);
}

double p_of_phi(double phi) {
  const double t = std::tanh(phi);
  return t / (1.0 + t);
}

ContourKind qr_kind(int n) {
  if (n == 2) return ContourKind::renyi2_qr;
  if (n == 3) return ContourKind::renyi3_qr;
  throw std::invalid_argument("renyi index must be 2 or 3");
}

ContourKind q_kind(int n) {
  if (n == 2) return ContourKind::renyi2_q;
  if (n == 3) return ContourKind::renyi3_q;
  throw std::invalid_argument("renyi index must be 2 or 3");
}

double theta_of_p(double p, int n) { return n * phi_of_p(p); }

EntropyResult entropies_breaking(double beta, const ModelParams& params,
                                 double p, int n, const ChannelConfig& cfg) {
  const double theta = theta_of_p(p, n);
  const int M = grid_for(beta, params, cfg);
  SolverConfig sc = cfg.solver;
  sc.keep_fields = false;
  const bool rich = cfg.richardson && can_refine_grid(M);

  auto action_of = [&](ContourKind kind) {
    SolveResult hi = solve(build_contour(kind, beta, M), params, theta, sc);
    if (!hi.converged)
      throw std::runtime_error(std::string("entropies_breaking: no convergence on ") +
                               to_string(kind));
    if (!rich) return hi.action;
    SolveResult lo = solve(build_contour(kind, beta, M / 2), params, theta, sc);
    if (!lo.converged)
      throw std::runtime_error(std::string("entropies_breaking: no convergence on ") +
                               to_string(kind));
    return 2.0 * hi.action - lo.action;
  };

  EntropyResult r;
  r.renyi_n = n;
  r.s_q = action_of(q_kind(n));
  r.s_qr = action_of(qr_kind(n));
  r.ic_density = (r.s_q - r.s_qr) / (n - 1);
  return r;
}

std::vector<double> default_phi_grid(int points, double phi_max) {
  if (phi_max <= 0.0) phi_max = 2.0 * phi_of_p(0.45);
  std::vector<double> g;
  g.reserve(points);
  g.push_back(0.0);
  const int m = points - 1;
  for (int i = 1; i <= m; ++i)
    g.push_back(phi_max * std::pow(1000.0, static_cast<double>(i - m) / m));
  return g;
}

ActionTable build_action_table(double beta, const ModelParams& params, int n,
                               const std::vector<double>& phis,
                               const ChannelConfig& cfg) {
  const int M = grid_for(beta, params, cfg);
  const bool rich = cfg.richardson && can_refine_grid(M);
  std::vector<double> thetas(phis.size());
  for (size_t i = 0; i < phis.size(); ++i) thetas[i] = n * phis[i];

  SolverConfig sc = cfg.solver;
  sc.keep_fields = false;

  ActionTable t;
  t.renyi_n = n;
  t.beta = beta;
  t.phi = phis;
  t.s_qr.assign(phis.size(), kNaN);
  t.s_q.assign(phis.size(), kNaN);

  auto run = [&](ContourKind kind, std::vector<double>& out) {
    auto hi = continuation_solve(build_contour(kind, beta, M), params, thetas, sc);
    std::vector<SolveResult> lo;
    if (rich)
      lo = continuation_solve(build_contour(kind, beta, M / 2), params, thetas, sc);
    int failed = 0;
    for (size_t i = 0; i < phis.size(); ++i) {
      if (!hi[i].converged || (rich && !lo[i].converged)) {
        ++failed;
        continue;
      }
      out[i] = rich ? 2.0 * hi[i].action - lo[i].action : hi[i].action;
    }
    return failed;
  };
  const int failed = run(q_kind(n), t.s_q) + run(qr_kind(n), t.s_qr);
  if (failed > 0)
    std::fprintf(stderr,
                 "warning: %d of %zu phi-table solves did not converge (beta=%g, n=%d)\n",
                 failed, 2 * phis.size(), beta, n);
  return t;
}

EntropyResult entropies_conserving(double beta, const ModelParams& params,
                                   double q, int n, const ChannelConfig& cfg,
                                   const std::vector<double>& phi_grid) {
  return conserving_impl(beta, params, 0.0, q, n, cfg, phi_grid, nullptr,
                         nullptr, nullptr);
}

EntropyResult entropies_both(double beta, const ModelParams& params, double p,
                             double q, int n, const ChannelConfig& cfg,
                             const std::vector<double>& phi_grid) {
  if (q == 0.0) return entropies_breaking(beta, params, p, n, cfg);
  const double phi0 = phi_of_p(p);
  return conserving_impl(beta, params, phi0, q, n, cfg, phi_grid, nullptr,
                         nullptr, nullptr);
}

std::vector<EntropyResult> conserving_scan(double beta,
                                           const ModelParams& params, int n,
                                           const std::vector<double>& qs,
                                           const ChannelConfig& cfg,
                                           ActionTable* table_out) {
  std::vector<double> grid = default_phi_grid(cfg.phi_points, cfg.phi_max);
  ActionTable t = build_action_table(beta, params, n, grid, cfg);
  const int M = grid_for(beta, params, cfg);
  DiagramEvaluator eq(q_kind(n), beta, M, params, n, cfg.solver, cfg.richardson);
  DiagramEvaluator eqr(qr_kind(n), beta, M, params, n, cfg.solver, cfg.richardson);
  ChannelConfig c = cfg;
  c.refine_solves = std::min(cfg.refine_solves, 4);
  std::vector<EntropyResult> out;
  out.reserve(qs.size());
  for (double q : qs) {
    EntropyResult r;
    try {
      r = conserving_impl(beta, params, 0.0, q, n, c, grid, &eq, &eqr, &t);
    } catch (const std::exception&) {
      r.renyi_n = n;
      r.converged = false;
      r.s_q = r.s_qr = r.ic_density = kNaN;
    }
    out.push_back(r);
  }
  if (table_out) *table_out = std::move(t);
  return out;
}

double baseline_no_encoding(double p, double q) {
  if (!(p >= 0.0 && p < 0.5) || !(q >= 0.0))
    throw std::invalid_argument("baseline_no_encoding: invalid rates");
  const int N = (q > 0.0) ? 4 : 2;
  edoracle::OracleSystem sys(N);
  Eigen::VectorXcd state = sys.max_entangled();
  Eigen::MatrixXcd rho = state * state.adjoint();
  if (p > 0.0) rho = edoracle::apply_channel_single(sys, rho, p);
  if (q > 0.0) rho = edoracle::apply_channel_pair(sys, rho, q);
  const double s_qr = edoracle::renyi_entropy(rho, 2);
  const double s_q = edoracle::renyi_entropy(edoracle::reduce_to_q(sys, rho), 2);
  return (s_q - s_qr) / N;
}

}  // namespace sykci
