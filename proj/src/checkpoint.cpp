#include "sykci/checkpoint.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>

namespace sykci {

namespace {
constexpr char kMagic[8] = {'S', 'Y', 'K', 'G', 'F', '0', '1', '\n'};

const char* model_name(Model m) { return m == Model::syk ? "syk" : "lowrank"; }

Model model_from(const std::string& s) {
  if (s == "syk") return Model::syk;
  if (s == "lowrank") return Model::lowrank;
  throw std::runtime_error("checkpoint: unknown model tag " + s);
}
}  // namespace

void save_checkpoint(const std::string& path, const BilocalField& G,
                     const ModelParams& params, double theta) {
  const ContourSpec& s = G.spec;
  const int dim = s.dim();
  if (G.values.rows() != dim || G.values.cols() != dim)
    throw std::invalid_argument("save_checkpoint: field has no values");
  const bool complex_storage = G.values.imag().cwiseAbs().maxCoeff() > 0.0;

  nlohmann::json h;
  h["kind"] = to_string(s.kind);
  h["beta"] = s.beta;
  h["M"] = s.grid_per_beta;
  h["flavors"] = s.flavors;
  h["model"] = model_name(params.model);
  h["theta"] = theta;
  h["dtype"] = "f64";
  h["layout"] = "row-major";
  h["storage"] = complex_storage ? "interleaved-complex" : "real";
  if (params.model == Model::syk) {
    h["J"] = params.J;
  } else {
    h["g"] = params.g;
    h["rank_gamma"] = params.rank_gamma;
  }
  const std::string header = h.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(kMagic, 8);
  const std::uint32_t hlen = static_cast<std::uint32_t>(header.size());
  char lenbuf[4] = {static_cast<char>(hlen & 0xff),
                    static_cast<char>((hlen >> 8) & 0xff),
                    static_cast<char>((hlen >> 16) & 0xff),
                    static_cast<char>((hlen >> 24) & 0xff)};
  out.write(lenbuf, 4);
  out.write(header.data(), header.size());
  if (complex_storage) {
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) {
        const double re = G.values(j, k).real(), im = G.values(j, k).imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
      }
  } else {
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) {
        const double re = G.values(j, k).real();
        out.write(reinterpret_cast<const char*>(&re), 8);
      }
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

BilocalField load_checkpoint(const std::string& path, ModelParams* params_out,
                             double* theta_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  char lenbuf[4];
  in.read(lenbuf, 4);
  const std::uint32_t hlen = static_cast<std::uint8_t>(lenbuf[0]) |
                             (static_cast<std::uint8_t>(lenbuf[1]) << 8) |
                             (static_cast<std::uint8_t>(lenbuf[2]) << 16) |
                             (static_cast<std::uint8_t>(lenbuf[3]) << 24);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) throw std::runtime_error("load_checkpoint: truncated header in " + path);
  nlohmann::json h = nlohmann::json::parse(header);

  ContourSpec spec = build_contour(contour_kind_from_string(h.at("kind")),
                                   h.at("beta").get<double>(),
                                   h.at("M").get<int>());
  if (spec.flavors != h.at("flavors").get<int>())
    throw std::runtime_error("load_checkpoint: flavor mismatch in " + path);

  if (params_out) {
    params_out->model = model_from(h.at("model"));
    if (params_out->model == Model::syk)
      params_out->J = h.value("J", 1.0);
    else {
      params_out->g = h.value("g", 1.0);
      params_out->rank_gamma = h.value("rank_gamma", 1.0);
    }
  }
  if (theta_out) *theta_out = h.at("theta").get<double>();

  const bool complex_storage = h.value("storage", "real") == "interleaved-complex";
  const int dim = spec.dim();
  BilocalField f;
  f.spec = spec;
  f.values.resize(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), 8);
      if (complex_storage) in.read(reinterpret_cast<char*>(&im), 8);
      f.values(j, k) = {re, im};
    }
  if (!in) throw std::runtime_error("load_checkpoint: truncated payload in " + path);
  return f;
}

}  // namespace sykci
