#include "run_config.hpp"

#include <charconv>

#include "nhpp/error.hpp"
#include "nhpp/io.hpp"
#include "nhpp/likelihood.hpp"

namespace nhpp::cli {

namespace {

double parse_number(const std::string& text, const std::string& context) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("cannot parse '" + text + "' in " + context);
  }
  return v;
}

std::string absolute_under(const std::string& path, const fs::path& base) {
  const fs::path p(path);
  return (p.is_absolute() ? p : base / p).lexically_normal().string();
}

void absolutize_field_list(json& list, const fs::path& base) {
  if (!list.is_array()) return;
  for (auto& f : list) {
    if (!f.is_string()) continue;
    const auto s = f.get<std::string>();
    if (s.rfind("raster:", 0) == 0) f = "raster:" + absolute_under(s.substr(7), base);
  }
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

json load_config(const fs::path& path) {
  json cfg = io::read_json(path);
  if (!cfg.is_object()) throw ConfigError("config '" + path.string() + "' must be a JSON object");
  absolutize_paths(cfg, fs::absolute(path).parent_path());
  return cfg;
}

void absolutize_paths(json& cfg, const fs::path& base) {
  for (const char* key : {"points", "chain"}) {
    if (cfg.contains(key) && cfg[key].is_string()) {
      cfg[key] = absolute_under(cfg[key].get<std::string>(), base);
    }
  }
  if (cfg.contains("fields")) absolutize_field_list(cfg["fields"], base);
  if (cfg.contains("resolutions") && cfg["resolutions"].is_array()) {
    for (auto& r : cfg["resolutions"]) {
      if (r.contains("fields")) absolutize_field_list(r["fields"], base);
    }
  }
}

CovariateField parse_field(const std::string& spec) {
  if (spec == "x") return CovariateField::coord_x();
  if (spec == "y") return CovariateField::coord_y();
  if (spec == "xy") return CovariateField::product();
  if (spec == "x2") return CovariateField::square_x();
  if (spec.rfind("dist:", 0) == 0) {
    const auto parts = split_list(spec.substr(5), ':');
    if (parts.size() != 2) throw ConfigError("distance field must be 'dist:cx:cy'");
    return CovariateField::distance_to(parse_number(parts[0], spec), parse_number(parts[1], spec));
  }
  if (spec.rfind("raster:", 0) == 0) {
    const std::string path = spec.substr(7);
    require_file(path, "raster");
    return CovariateField::raster(io::read_raster(path), fs::path(path).stem().string());
  }
  throw ConfigError("unknown covariate '" + spec +
                    "' (expected x, y, xy, x2, dist:cx:cy or raster:path)");
}

std::vector<CovariateField> parse_fields(const json& list) {
  std::vector<CovariateField> out;
  if (list.is_null()) return out;
  if (!list.is_array()) throw ConfigError("'fields' must be a list of covariate strings");
  for (const auto& f : list) out.push_back(parse_field(f.get<std::string>()));
  return out;
}

Region region_from(const json& cfg) {
  if (!cfg.contains("region") || cfg["region"].is_null()) return Region{};
  const auto r = cfg["region"].get<std::vector<double>>();
  if (r.size() != 4) throw ConfigError("'region' must be [xmin, xmax, ymin, ymax]");
  return Region(r[0], r[1], r[2], r[3]);
}

json region_json(const Region& r) { return {r.xmin(), r.xmax(), r.ymin(), r.ymax()}; }

std::uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed") || cfg["seed"].is_null()) {
    throw ConfigError("a seed is required (--seed or \"seed\" in the config)");
  }
  return cfg["seed"].get<std::uint64_t>();
}

PriorSpec prior_from(const json& value) {
  PriorSpec p;
  if (value.is_null() || value == "default") {
    p = PriorSpec{};
  } else if (value == "simulation") {
    p = PriorSpec::simulation();
  } else if (value.is_object()) {
    p.sigma0_sq = value.value("sigma0_sq", p.sigma0_sq);
    p.a1 = value.value("a1", p.a1);
    p.b1 = value.value("b1", p.b1);
  } else {
    throw ConfigError("'prior' must be \"default\", \"simulation\" or an object");
  }
  p.validate();
  return p;
}

json prior_json(const PriorSpec& p) {
  return {{"sigma0_sq", p.sigma0_sq}, {"a1", p.a1}, {"b1", p.b1}};
}

json resolve_mcmc(const json& cfg) {
  const std::string profile = cfg.value("profile", std::string("sim2018"));
  const McmcConfig base = McmcConfig::profile(profile);
  json m = {{"n_iter", base.n_iter},         {"burn_in", base.burn_in},
            {"thin", base.thin},             {"proposal_sd", base.proposal_sd},
            {"adapt", base.adapt},           {"joint", base.joint},
            {"initial_beta", json::array()}};
  if (cfg.contains("mcmc") && cfg["mcmc"].is_object()) {
    for (const auto& [key, value] : cfg["mcmc"].items()) {
      if (!m.contains(key)) throw ConfigError("unknown mcmc setting '" + key + "'");
      m[key] = value;
    }
  }
  if (m["proposal_sd"].is_number()) m["proposal_sd"] = json::array({m["proposal_sd"]});
  return m;
}

McmcConfig mcmc_from(const json& resolved, std::uint64_t seed) {
  McmcConfig c;
  c.n_iter = resolved.at("n_iter").get<int>();
  c.burn_in = resolved.at("burn_in").get<int>();
  c.thin = resolved.at("thin").get<int>();
  c.proposal_sd = resolved.at("proposal_sd").get<std::vector<double>>();
  c.adapt = resolved.at("adapt").get<bool>();
  c.joint = resolved.at("joint").get<bool>();
  c.initial_beta = resolved.at("initial_beta").get<std::vector<double>>();
  c.seed = seed;
  c.validate();
  return c;
}

QuadratureGrid grid_from(const json& cfg, std::span<const CovariateField> fields,
                         const Region& region) {
  if (!cfg.contains("grid") || cfg["grid"].is_null()) return default_grid(fields, region);
  const auto g = cfg["grid"].get<std::vector<int>>();
  if (g.size() != 2) throw ConfigError("'grid' must be [nx, ny]");
  return QuadratureGrid(region, g[0], g[1]);
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw IoError(what + " file '" + path + "' does not exist");
}

}  // namespace nhpp::cli
