// Flat sectioned key=value run configuration.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sykci/models.hpp"
#include "sykci/solver.hpp"

namespace sykci {

struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse_string(const std::string& text);
  static IniFile parse_file(const std::string& path);

  bool has(const std::string& sec, const std::string& key) const;
  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback = "") const;
  double get_double(const std::string& sec, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& sec, const std::string& key, int fallback) const;
  bool get_bool(const std::string& sec, const std::string& key, bool fallback) const;
  // comma list or start:step:stop range
  std::vector<double> get_list(const std::string& sec, const std::string& key,
                               const std::vector<double>& fallback) const;
};

struct RunConfig {
  ModelParams model;
  SolverConfig solver;
  int renyi_n = 2;

  // contour / grid policy (replica diagrams)
  std::string contour_kind = "thermal";
  int M = 0;                  // 0 = auto from dtau_target
  double dtau_target = 0.05;  // dtau * coupling_scale target

  std::vector<double> beta_grid = {20.0};
  std::vector<double> p_grid;
  std::vector<double> q_grid;
  std::vector<double> gamma_grid;
  std::vector<double> epsilons = {0.05};

  int phi_points = 41;
  double phi_max = 0.0;  // 0 = default
  double ssb_tol = 1e-4;

  int oracle_n = 8;
  double oracle_beta = 5.0;
  std::vector<unsigned> seeds = {1, 2, 3, 4, 5};

  // beta(N) mapping metadata for the threshold report
  double map_c = 1.0;
  double map_alpha = 0.9;
  double map_eta = 0.5;

  std::string out_dir = ".";
  int workers = 2;
  std::string warm_start_path;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_ini(const IniFile& ini);
};

int replica_grid_M(double beta, const ModelParams& params, int M,
                   double dtau_target);

}  // namespace sykci
