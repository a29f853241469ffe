#include "sykci/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sykci {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos)
        throw std::runtime_error("config: unterminated section header: " + line);
      section = trim(line.substr(1, close - 1));
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value, got: " + line);
    ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool IniFile::has(const std::string& sec, const std::string& key) const {
  const auto s = sections.find(sec);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
  const auto s = sections.find(sec);
  if (s == sections.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& sec, const std::string& key,
                           double fallback) const {
  const std::string v = get(sec, key);
  return v.empty() ? fallback : std::stod(v);
}

int IniFile::get_int(const std::string& sec, const std::string& key,
                     int fallback) const {
  const std::string v = get(sec, key);
  return v.empty() ? fallback : std::stoi(v);
}

bool IniFile::get_bool(const std::string& sec, const std::string& key,
                       bool fallback) const {
  std::string v = get(sec, key);
  if (v.empty()) return fallback;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: bad boolean for " + sec + "." + key);
}

std::vector<double> IniFile::get_list(const std::string& sec,
                                      const std::string& key,
                                      const std::vector<double>& fallback) const {
  const std::string v = get(sec, key);
  if (v.empty()) return fallback;
  std::vector<double> out;
  // start:step:stop range
  if (std::count(v.begin(), v.end(), ':') == 2) {
    double a, d, b;
    char c1, c2;
    std::istringstream ss(v);
    ss >> a >> c1 >> d >> c2 >> b;
    if (!ss || c1 != ':' || c2 != ':' || d == 0.0)
      throw std::runtime_error("config: bad range for " + sec + "." + key);
    for (double x = a; (d > 0) ? x <= b + 1e-12 * std::abs(d) : x >= b - 1e-12 * std::abs(d); x += d)
      out.push_back(x);
    return out;
  }
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

int replica_grid_M(double beta, const ModelParams& params, int M,
                   double dtau_target) {
  if (M > 0) return M;
  const double scale = std::max(params.coupling_scale(), 1e-12);
  int m = static_cast<int>(std::ceil(beta * scale / dtau_target / 8.0)) * 8;
  return std::clamp(m, 32, 2048);
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_ini(IniFile::parse_file(path));
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
  RunConfig c;
  const std::string mtype = ini.get("model", "type", "syk");
  if (mtype == "syk")
    c.model.model = Model::syk;
  else if (mtype == "lowrank")
    c.model.model = Model::lowrank;
  else
    throw std::runtime_error("config: unknown model type " + mtype);
  c.model.J = ini.get_double("model", "J", 1.0);
  c.model.g = ini.get_double("model", "g", 1.0);
  c.model.rank_gamma = ini.get_double("model", "rank_gamma", 1.0);

  c.solver.mixing = ini.get_double("solver", "mixing", 0.3);
  c.solver.tolerance = ini.get_double("solver", "tolerance", 1e-8);
  c.solver.max_iterations = ini.get_int("solver", "max_iterations", 4000);
  c.solver.acceleration = ini.get_bool("solver", "acceleration", false);

  c.contour_kind = ini.get("contour", "kind", "thermal");
  c.M = ini.get_int("contour", "M", 0);
  c.dtau_target = ini.get_double("contour", "dtau_target", 0.05);

  c.renyi_n = ini.get_int("scan", "renyi", 2);
  c.beta_grid = ini.get_list("scan", "beta", c.beta_grid);
  c.p_grid = ini.get_list("scan", "p", {});
  c.q_grid = ini.get_list("scan", "q", {});
  c.gamma_grid = ini.get_list("scan", "rank_gamma", {});
  c.phi_points = ini.get_int("scan", "phi_points", 41);
  c.phi_max = ini.get_double("scan", "phi_max", 0.0);
  c.ssb_tol = ini.get_double("scan", "ssb_tol", 1e-4);

  c.epsilons = ini.get_list("threshold", "epsilons", c.epsilons);
  c.map_c = ini.get_double("threshold", "map_c", 1.0);
  c.map_alpha = ini.get_double("threshold", "map_alpha", 0.9);
  c.map_eta = ini.get_double("threshold", "map_eta", 0.5);

  c.oracle_n = ini.get_int("oracle", "n_majorana", 8);
  c.oracle_beta = ini.get_double("oracle", "beta", 5.0);
  if (ini.has("oracle", "seeds")) {
    c.seeds.clear();
    for (double s : ini.get_list("oracle", "seeds", {}))
      c.seeds.push_back(static_cast<unsigned>(s));
  }

  c.out_dir = ini.get("output", "dir", ".");
  c.workers = ini.get_int("output", "workers", 2);
  c.warm_start_path = ini.get("solver", "warm_start", "");
  return c;
}

}  // namespace sykci
