// Command-line entry point: solve, coherent-info, threshold, oracle,
// fit-gamma and extrapolate pipelines over a key=value run configuration.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "sykci/analysis.hpp"
#include "sykci/channels.hpp"
#include "sykci/checkpoint.hpp"
#include "sykci/config.hpp"
#include "sykci/edoracle.hpp"

using nlohmann::json;
using namespace sykci;

namespace {

struct CliOpts {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  int renyi = 0;
};

RunConfig load_config(const CliOpts& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::from_file(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.renyi > 0) cfg.renyi_n = o.renyi;
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

ChannelConfig channel_config(const RunConfig& cfg) {
  ChannelConfig c;
  c.solver = cfg.solver;
  c.M = cfg.M;
  c.dtau_target = cfg.dtau_target;
  c.ssb_tol = cfg.ssb_tol;
  c.phi_points = cfg.phi_points;
  c.phi_max = cfg.phi_max;
  return c;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path);
  std::cout << "wrote " << path << "\n";
}

// Run fn(i) over a bounded pool; results land in pre-sized slots.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  int next = 0;
  auto worker = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= n) return;
        i = next++;
      }
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

int cmd_solve(const RunConfig& cfg) {
  const ContourKind kind = contour_kind_from_string(cfg.contour_kind);
  json summary = json::array();
  bool any_fail = false;

  std::optional<BilocalField> warm;
  if (!cfg.warm_start_path.empty()) warm = load_checkpoint(cfg.warm_start_path);

  for (double beta : cfg.beta_grid) {
    const int M = (kind == ContourKind::thermal)
                      ? ((cfg.M > 0) ? cfg.M : default_thermal_M(beta, cfg.model))
                      : replica_grid_M(beta, cfg.model, cfg.M, cfg.dtau_target);
    ContourSpec spec = build_contour(kind, beta, M);
    SolverConfig sc = cfg.solver;
    sc.keep_fields = true;
    if (warm && warm->spec.dim() == spec.dim()) sc.warm_start = warm;
    SolveResult r = solve(spec, cfg.model, 0.0, sc);
    any_fail = any_fail || !r.converged;

    char name[128];
    std::snprintf(name, sizeof name, "gf_%s_b%g_M%d.sykgf", to_string(kind), beta, M);
    const std::string path = cfg.out_dir + "/" + name;
    save_checkpoint(path, r.G, cfg.model, 0.0);
    summary.push_back({{"kind", to_string(kind)},
                       {"beta", beta},
                       {"M", M},
                       {"action", r.action},
                       {"iterations", r.iterations},
                       {"residual", r.residual},
                       {"converged", r.converged},
                       {"checkpoint", path}});
    std::cout << "solve " << to_string(kind) << " beta=" << beta << " M=" << M
              << " action=" << r.action << " iters=" << r.iterations << "\n";
  }
  write_json(cfg.out_dir + "/solve_summary.json", summary);
  return any_fail ? 2 : 0;
}

int cmd_coherent_info(const RunConfig& cfg) {
  const ChannelConfig cc = channel_config(cfg);
  const int n = cfg.renyi_n;
  std::ofstream csv(cfg.out_dir + "/coherent_info.csv");
  csv << "# sykci coherent-info v1: beta,p,q,s_qr,s_q,ic_density,phi_star,ssb,converged\n";
  csv << "beta,p,q,s_qr,s_q,ic_density,phi_star,ssb,converged\n";
  csv.precision(12);
  bool any_fail = false;

  struct Row {
    double beta, p, q;
    EntropyResult r;
  };
  std::vector<Row> rows;

  // one task per beta: points inside a task are warm-chained sequentially
  std::vector<std::vector<Row>> per_beta(cfg.beta_grid.size());
  std::mutex log_mu;
  parallel_for(static_cast<int>(cfg.beta_grid.size()), cfg.workers, [&](int bi) {
    const double beta = cfg.beta_grid[bi];
    std::vector<Row>& local = per_beta[bi];
    if (!cfg.p_grid.empty() && cfg.q_grid.empty()) {
      for (double p : cfg.p_grid) {
        Row row{beta, p, 0.0, {}};
        try {
          row.r = entropies_breaking(beta, cfg.model, p, n, cc);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lk(log_mu);
          std::cerr << "beta=" << beta << " p=" << p << ": " << e.what() << "\n";
          row.r.converged = false;
        }
        local.push_back(row);
      }
    } else if (cfg.p_grid.empty() && !cfg.q_grid.empty()) {
      auto scan = conserving_scan(beta, cfg.model, n, cfg.q_grid, cc);
      for (size_t i = 0; i < cfg.q_grid.size(); ++i)
        local.push_back({beta, 0.0, cfg.q_grid[i], scan[i]});
    } else {
      for (double p : cfg.p_grid)
        for (double q : cfg.q_grid) {
          Row row{beta, p, q, {}};
          try {
            row.r = entropies_both(beta, cfg.model, p, q, n, cc);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lk(log_mu);
            std::cerr << "beta=" << beta << " p=" << p << " q=" << q << ": "
                      << e.what() << "\n";
            row.r.converged = false;
          }
          local.push_back(row);
        }
    }
  });
  for (auto& local : per_beta)
    rows.insert(rows.end(), local.begin(), local.end());
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    if (a.p != b.p) return a.p < b.p;
    return a.q < b.q;
  });
  for (const Row& w : rows) {
    any_fail = any_fail || !w.r.converged;
    csv << w.beta << "," << w.p << "," << w.q << "," << w.r.s_qr << ","
        << w.r.s_q << "," << w.r.ic_density << "," << w.r.phi_star << ","
        << (w.r.ssb ? 1 : 0) << "," << (w.r.converged ? 1 : 0) << "\n";
  }
  std::cout << "wrote " << cfg.out_dir + "/coherent_info.csv" << " (" << rows.size()
            << " rows)\n";
  return any_fail ? 2 : 0;
}

int cmd_threshold(const RunConfig& cfg) {
  const ChannelConfig cc = channel_config(cfg);
  const int n = cfg.renyi_n;
  json out;
  out["renyi_n"] = n;
  out["mapping"] = {{"c", cfg.map_c}, {"alpha", cfg.map_alpha}, {"eta", cfg.map_eta}};
  json per_beta = json::array();
  bool any_fail = false;

  for (double beta : cfg.beta_grid) {
    json jb;
    jb["beta"] = beta;
    jb["N_of_beta"] = std::pow(beta / cfg.map_c, 1.0 / cfg.map_alpha);
    const double clean = entropies_breaking(beta, cfg.model, 0.0, n, cc).ic_density;
    jb["clean_ic_density"] = clean;

    if (!cfg.q_grid.empty()) {
      auto scan = conserving_scan(beta, cfg.model, n, cfg.q_grid, cc);
      std::vector<std::pair<double, double>> qphi;
      for (size_t i = 0; i < scan.size(); ++i)
        if (scan[i].converged) qphi.push_back({cfg.q_grid[i], scan[i].phi_star});
      if (qphi.size() >= 3) {
        auto tr = detect_ssb_transition(qphi);
        jb["q_c"] = tr.q_c;
        jb["q_c_open_ended"] = tr.open_ended;
      }
    }
    if (!cfg.p_grid.empty()) {
      std::vector<std::pair<double, double>> curve;
      for (double p : cfg.p_grid) {
        try {
          curve.push_back({p, entropies_breaking(beta, cfg.model, p, n, cc).ic_density});
        } catch (const std::exception&) {
          any_fail = true;
        }
      }
      json pth = json::array();
      for (double eps : cfg.epsilons) {
        auto t = epsilon_threshold(curve, clean, eps);
        pth.push_back({{"epsilon", eps}, {"p_th", t.rate}, {"open_ended", t.open_ended}});
      }
      jb["p_th"] = pth;
    }
    per_beta.push_back(jb);
  }
  out["points"] = per_beta;
  write_json(cfg.out_dir + "/threshold.json", out);
  return any_fail ? 2 : 0;
}

int cmd_oracle(const RunConfig& cfg) {
  bool conventions_ok = true;
  auto check = [&](const char* name, double dev, double bound) {
    const bool ok = dev <= bound;
    conventions_ok = conventions_ok && ok;
    std::cout << (ok ? "[pass] " : "[FAIL] ") << name << " deviation=" << dev << "\n";
  };
  check("choi single N=2 p=0.3", edoracle::verify_channel_choi(0.3, 2), 1e-10);
  check("choi single N=4 p=0.3", edoracle::verify_channel_choi(0.3, 4), 1e-10);
  check("choi pair   N=4 q=0.3", edoracle::verify_channel_choi_pair(0.3, 4), 1e-10);

  // beta = 0 entropy of the clean code state
  {
    const int N = 4;
    edoracle::OracleSystem sys(N);
    Eigen::VectorXcd v = sys.max_entangled();
    Eigen::MatrixXcd rho = v * v.adjoint();
    const double s = edoracle::renyi_entropy(edoracle::reduce_to_q(sys, rho), 2);
    check("beta=0 renyi-2 entropy minus (N/2) log 2",
          std::abs(s - 0.5 * N * std::log(2.0)), 1e-10);
  }

  // coherent-information bounds on random draws
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> up(0.0, 0.45), uq(0.0, 0.8), ub(0.1, 6.0);
  int violations = 0;
  const int n_draws = 100;
  const int N = std::min(cfg.oracle_n, 8);
  for (int d = 0; d < n_draws; ++d) {
    edoracle::OracleSystem sys(N);
    const auto h = edoracle::build_hamiltonian(sys.gammas_r(),
                                               static_cast<unsigned>(d + 1), cfg.model);
    const auto state = sys.tfd_state(h, ub(rng));
    const double clean = edoracle::exact_coherent_info(sys, state, 0.0, 0.0, 2);
    const double ic = edoracle::exact_coherent_info(sys, state, up(rng), uq(rng), 2);
    if (!(ic <= clean + 1e-10 && ic >= -clean - 1e-10)) ++violations;
  }
  check("coherent-information bounds on 100 draws", violations, 0);

  // disorder-averaged curves
  std::ofstream csv(cfg.out_dir + "/oracle_ic.csv");
  csv << "# sykci oracle v1: kind,rate,ic_mean,ic_stderr,n_majorana,beta,n_seeds\n";
  csv << "kind,rate,ic_mean,ic_stderr,n_majorana,beta,n_seeds\n";
  csv.precision(10);
  auto sweep = [&](const char* kind, const std::vector<double>& grid, bool is_p) {
    for (double rate : grid) {
      double sum = 0, sum2 = 0;
      for (unsigned s : cfg.seeds) {
        edoracle::OracleSystem sys(cfg.oracle_n);
        const auto h = edoracle::build_hamiltonian(sys.gammas_r(), s, cfg.model);
        const auto state = sys.tfd_state(h, cfg.oracle_beta);
        const double ic = edoracle::exact_coherent_info(
            sys, state, is_p ? rate : 0.0, is_p ? 0.0 : rate, cfg.renyi_n);
        sum += ic;
        sum2 += ic * ic;
      }
      const int ns = static_cast<int>(cfg.seeds.size());
      const double mean = sum / ns;
      const double var = std::max(0.0, sum2 / ns - mean * mean);
      csv << kind << "," << rate << "," << mean / cfg.oracle_n << ","
          << std::sqrt(var / std::max(1, ns - 1)) / cfg.oracle_n << ","
          << cfg.oracle_n << "," << cfg.oracle_beta << "," << ns << "\n";
    }
  };
  if (!cfg.p_grid.empty()) sweep("breaking", cfg.p_grid, true);
  if (!cfg.q_grid.empty()) sweep("conserving", cfg.q_grid, false);
  std::cout << "wrote " << cfg.out_dir + "/oracle_ic.csv\n";
  return conventions_ok ? 0 : 3;
}

int cmd_fit_gamma(const RunConfig& cfg) {
  const ChannelConfig cc = channel_config(cfg);
  json out = json::array();
  for (double beta : cfg.beta_grid) {
    PerturbativeFit f = fit_gamma(beta, cfg.model, cfg.renyi_n, cc);
    out.push_back({{"beta", beta},
                   {"renyi_n", f.renyi_n},
                   {"gamma_q", f.gamma_q},
                   {"gamma_qr", f.gamma_qr},
                   {"slope_q", f.slope_q},
                   {"slope_qr", f.slope_qr},
                   {"slope_predicted", f.slope_predicted},
                   {"g_thermal_ref", f.g_thermal_ref},
                   {"residual", f.residual}});
    std::cout << "beta=" << beta << " gamma_q=" << f.gamma_q
              << " gamma_qr=" << f.gamma_qr << "\n";
  }
  write_json(cfg.out_dir + "/fit_gamma.json", out);
  return 0;
}

int cmd_extrapolate(const RunConfig& cfg) {
  auto curve = thermal_entropy_curve(cfg.beta_grid, cfg.model, cfg.solver, 0.01, cfg.M);
  auto ext = extrapolate_zero_T(curve, 2);
  json out;
  out["order"] = 2;
  out["s0"] = ext.value;
  out["s0_uncertainty"] = ext.uncertainty;
  json pts = json::array();
  for (auto [b, s] : curve) pts.push_back({{"beta", b}, {"entropy", s}});
  out["curve"] = pts;
  write_json(cfg.out_dir + "/zero_t_entropy.json", out);
  std::cout << "s0 = " << ext.value << " +- " << ext.uncertainty << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-N SYK coherent-information solver suite"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOpts opts;
  app.add_option("--config", opts.config_path, "run configuration file");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--workers", opts.workers, "worker pool size");
  app.add_option("--renyi", opts.renyi, "Renyi index (2 or 3)")->check(CLI::IsMember({2, 3}));

  auto* c_solve = app.add_subcommand("solve", "solve contours, write checkpoints");
  auto* c_ci = app.add_subcommand("coherent-info", "rate scans of the coherent information");
  auto* c_th = app.add_subcommand("threshold", "epsilon-thresholds and SSB onset");
  auto* c_or = app.add_subcommand("oracle", "exact small-N oracle suite");
  auto* c_fg = app.add_subcommand("fit-gamma", "perturbative quadratic coefficients");
  auto* c_ex = app.add_subcommand("extrapolate", "zero-temperature entropy extrapolation");

  CLI11_PARSE(app, argc, argv);
  try {
    const RunConfig cfg = load_config(opts);
    if (c_solve->parsed()) return cmd_solve(cfg);
    if (c_ci->parsed()) return cmd_coherent_info(cfg);
    if (c_th->parsed()) return cmd_threshold(cfg);
    if (c_or->parsed()) return cmd_oracle(cfg);
    if (c_fg->parsed()) return cmd_fit_gamma(cfg);
    if (c_ex->parsed()) return cmd_extrapolate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
