// nhpp: simulate, fit, select, study and oracle commands.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric or fit error,
// 4 I/O error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "nhpp/criteria.hpp"
#include "nhpp/error.hpp"
#include "nhpp/io.hpp"
#include "nhpp/parallel.hpp"
#include "nhpp/selection.hpp"
#include "nhpp/simulate.hpp"
#include "run_config.hpp"

using namespace nhpp;
using namespace nhpp::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct Shared {
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir = "out";
  std::string grid;
  std::string profile;
  // One option object per subcommand.
  std::vector<CLI::Option*> seed_opt, grid_opt, profile_opt;
};

struct Flags {
  Shared shared;
  int preset = 0;
  std::string method;
  std::string points;
  std::string fields;
  std::string model;
  std::string prior;
  std::string region;
  int n_iter = 0;
  int burn_in = 0;
  int thin = 0;
  double level = 0.95;
  bool include_homogeneous = false;
  int replicates = 0;
  std::string fixture;
  std::string chain;
  std::string schedule;
  std::string lpml_grid;
  std::map<std::string, std::vector<CLI::Option*>> given;
};

void track(Flags& f, const std::string& key, CLI::Option* opt) { f.given[key].push_back(opt); }

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--config", s.config, "JSON config file; flags override its values");
  s.seed_opt.push_back(cmd->add_option("--seed", s.seed, "master seed"));
  cmd->add_option("--jobs", s.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", s.out_dir, "output directory")->capture_default_str();
  s.grid_opt.push_back(cmd->add_option("--grid", s.grid, "quadrature grid as nx,ny"));
  s.profile_opt.push_back(
      cmd->add_option("--profile", s.profile, "sim2018, paper51 or paper52"));
}

void add_chain_flags(CLI::App* cmd, Flags& f) {
  track(f, "n_iter", cmd->add_option("--n-iter", f.n_iter, "MCMC iterations"));
  track(f, "burn_in", cmd->add_option("--burn-in", f.burn_in, "burn-in iterations"));
  track(f, "thin", cmd->add_option("--thin", f.thin, "thinning interval"));
}

void add_data_flags(CLI::App* cmd, Flags& f) {
  track(f, "points", cmd->add_option("--points", f.points, "point pattern CSV (x,y)"));
  track(f, "fields",
        cmd->add_option("--fields", f.fields, "covariates, e.g. x,y,dist:0.5:0.5,raster:z.txt"));
  track(f, "region", cmd->add_option("--region", f.region, "xmin,xmax,ymin,ymax"));
  track(f, "prior", cmd->add_option("--prior", f.prior, "default or simulation"));
}

bool any_set(const std::vector<CLI::Option*>& opts) {
  return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
}

bool given(const Flags& f, const std::string& key) {
  const auto it = f.given.find(key);
  return it != f.given.end() && any_set(it->second);
}

std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + part + "'");
    }
  }
  return out;
}

std::vector<int> integers(const std::string& text) {
  std::vector<int> out;
  for (double v : numbers(text)) {
    if (v != std::floor(v)) throw ConfigError("expected an integer, got " + io::format_double(v));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Config file first, then flags.
json merged_config(const Flags& f) {
  json cfg = f.shared.config.empty() ? json::object() : load_config(f.shared.config);
  const fs::path cwd = fs::current_path();
  if (any_set(f.shared.seed_opt)) cfg["seed"] = f.shared.seed;
  if (any_set(f.shared.grid_opt)) cfg["grid"] = integers(f.shared.grid);
  if (any_set(f.shared.profile_opt)) {
    cfg["profile"] = f.shared.profile;
    cfg.erase("mcmc");
  }
  if (given(f, "preset")) cfg["preset"] = f.preset;
  if (given(f, "method")) cfg["method"] = f.method;
  if (given(f, "points")) cfg["points"] = f.points;
  if (given(f, "fields")) cfg["fields"] = split_list(f.fields);
  if (given(f, "model")) {
    cfg["model"] = f.model.empty() || f.model == "none" ? std::vector<int>{} : integers(f.model);
  }
  if (given(f, "prior")) cfg["prior"] = f.prior;
  if (given(f, "region")) cfg["region"] = numbers(f.region);
  for (const char* key : {"n_iter", "burn_in", "thin"}) {
    if (!given(f, key)) continue;
    if (!cfg.contains("mcmc") || !cfg["mcmc"].is_object()) cfg["mcmc"] = json::object();
    const std::string k = key;
    cfg["mcmc"][k] = k == "n_iter" ? f.n_iter : k == "burn_in" ? f.burn_in : f.thin;
  }
  if (given(f, "level")) cfg["level"] = f.level;
  if (given(f, "include_homogeneous")) cfg["include_homogeneous"] = f.include_homogeneous;
  if (given(f, "replicates")) cfg["replicates"] = f.replicates;
  if (given(f, "fixture")) cfg["fixture"] = f.fixture;
  if (given(f, "chain")) cfg["chain"] = f.chain;
  if (given(f, "schedule")) cfg["schedule"] = integers(f.schedule);
  if (given(f, "lpml_grid")) cfg["lpml_grid"] = integers(f.lpml_grid);
  json flag_paths = json::object();
  for (const char* key : {"points", "chain", "fields"}) {
    if (given(f, key)) flag_paths[key] = cfg[key];
  }
  absolutize_paths(flag_paths, cwd);
  for (const auto& [key, value] : flag_paths.items()) cfg[key] = value;
  return cfg;
}

fs::path prepare_out(const Flags& f) {
  const fs::path out(f.shared.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory '" + out.string() + "'");
  }
  return out;
}

std::string field_string(const CovariateField& field, const std::string& raster_file) {
  if (const auto* a = std::get_if<Analytic>(&field.source())) {
    switch (a->kind) {
      case AnalyticKind::CoordX: return "x";
      case AnalyticKind::CoordY: return "y";
      case AnalyticKind::Product: return "xy";
      case AnalyticKind::SquareX: return "x2";
      case AnalyticKind::DistanceTo:
        return "dist:" + io::format_double(a->anchor.x) + ":" + io::format_double(a->anchor.y);
    }
  }
  return "raster:" + raster_file;
}

std::vector<std::size_t> model_indices(const json& list, std::size_t p) {
  std::vector<std::size_t> idx;
  for (const auto& v : list) {
    const int j = v.get<int>();
    if (j < 1 || static_cast<std::size_t>(j) > p) {
      throw ConfigError("covariate index " + std::to_string(j) + " is outside 1.." +
                        std::to_string(p));
    }
    idx.push_back(static_cast<std::size_t>(j - 1));
  }
  return idx;
}

json one_based(const ModelSpec& m) {
  json out = json::array();
  for (std::size_t j : m.covariates()) out.push_back(j + 1);
  return out;
}

json grid_json(const QuadratureGrid& g) { return {g.nx(), g.ny()}; }

PointPattern load_points(const json& cfg, const Region& region) {
  if (!cfg.contains("points")) throw ConfigError("'points' is required");
  const std::string path = cfg["points"].get<std::string>();
  require_file(path, "points");
  return io::read_pattern_csv(path, region);
}

// ---------------------------------------------------------------- simulate

int run_simulate(const Flags& f) {
  json cfg = merged_config(f);
  if (!cfg.contains("preset")) throw ConfigError("'preset' is required (1-4)");
  const Scenario sc = scenario_preset(cfg["preset"].get<int>());
  const std::uint64_t seed = require_seed(cfg);
  const std::string method = cfg.value("method", std::string("percell"));
  if (method != "percell" && method != "thinning") {
    throw ConfigError("method must be 'percell' or 'thinning'");
  }
  const QuadratureGrid cells =
      cfg.contains("grid") && !cfg["grid"].is_null() ? grid_from(cfg, {}, sc.region) : sc.grid;

  const json manifest = {{"command", "simulate"},
                         {"preset", sc.id},
                         {"seed", seed},
                         {"method", method},
                         {"grid", grid_json(cells)}};
  const fs::path out = prepare_out(f);

  const ScenarioDraw draw = sc.draw(derive_seed(seed, 0));
  const SimulationMethod m =
      method == "percell" ? SimulationMethod{PerCell{cells.nx(), cells.ny()}} : Thinning{};
  const PointPattern pattern = simulate_nhpp(draw.truth, sc.region, m, derive_seed(seed, 1));

  io::write_pattern_csv(out / "points.csv", pattern);
  json fields = json::array();
  for (std::size_t j = 0; j < draw.fitting_fields.size(); ++j) {
    const auto& field = draw.fitting_fields[j];
    const std::string file = "covariate_" + std::to_string(j + 1) + ".txt";
    if (const auto* r = field.as_raster()) io::write_raster(out / file, *r);
    fields.push_back(field_string(field, file));
  }
  json candidates = json::array();
  for (const auto& c : sc.candidates) candidates.push_back(one_based(c));
  const json fit_template = {{"points", "points.csv"},
                             {"region", region_json(sc.region)},
                             {"fields", fields},
                             {"prior", prior_json(sc.prior)},
                             {"candidates", candidates},
                             {"model", one_based(sc.candidates[sc.true_model])}};
  io::write_json(out / "fit.json", fit_template);
  io::write_json(out / "manifest.json", manifest);
  std::cout << "simulated " << pattern.size() << " points (preset " << sc.id << ", seed " << seed
            << ") into " << out.string() << "\n";
  return 0;
}

// --------------------------------------------------------------------- fit

struct DataConfig {
  Region region;
  json field_specs;
  std::vector<CovariateField> fields;
  PointPattern pattern;
  PriorSpec prior;
  json mcmc;
  std::uint64_t seed = 0;
};

DataConfig resolve_data(const json& cfg) {
  DataConfig d;
  d.region = region_from(cfg);
  d.field_specs = cfg.value("fields", json::array());
  d.fields = parse_fields(d.field_specs);
  check_fields_on(d.fields, d.region);
  d.pattern = load_points(cfg, d.region);
  d.prior = prior_from(cfg.value("prior", json("default")));
  d.mcmc = resolve_mcmc(cfg);
  d.seed = require_seed(cfg);
  return d;
}

int run_fit(const Flags& f) {
  const json cfg = merged_config(f);
  DataConfig d = resolve_data(cfg);
  const ModelSpec model(model_indices(cfg.value("model", json::array()), d.fields.size()));
  const QuadratureGrid grid = grid_from(cfg, d.fields, d.region);
  const double level = cfg.value("level", 0.95);
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  const McmcConfig mcmc = mcmc_from(d.mcmc, d.seed);

  const json manifest = {{"command", "fit"},       {"points", cfg["points"]},
                         {"region", region_json(d.region)}, {"fields", d.field_specs},
                         {"model", one_based(model)}, {"prior", prior_json(d.prior)},
                         {"mcmc", d.mcmc},          {"seed", d.seed},
                         {"grid", grid_json(grid)}, {"level", level}};
  const fs::path out = prepare_out(f);

  const DesignCache cache(model, d.fields, d.pattern, grid);
  Chain chain;
  try {
    chain = sample_posterior(cache, model, d.prior, mcmc);
  } catch (const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw NumericError("fit of " + model.label() + " failed: " + e.what());
  }
  for (const auto& w : chain.warnings) std::cerr << "warning: " << w << "\n";
  const CriteriaResult crit = score_chain(cache, chain);

  io::write_chain_csv(out / "chain.csv", chain);
  json summary = json::object();
  if (chain.n_kept() >= 10) summary = io::to_json(posterior_summary(chain, level));
  summary["acceptance_rate_beta"] = chain.acceptance_rate_beta;
  summary["n_kept"] = chain.n_kept();
  summary["warnings"] = chain.warnings;
  io::write_json(out / "summary.json", summary);
  io::write_json(out / "criteria.json",
                 io::criteria_json(model.label(), crit.dic, crit.lpml, "event_terms.csv"));

  std::string events = "index,x,y,log_harmonic_mean_intensity\n";
  for (std::size_t j = 0; j < d.pattern.size(); ++j) {
    events += std::to_string(j) + "," + io::format_double(d.pattern[j].x) + "," +
              io::format_double(d.pattern[j].y) + "," +
              io::format_double(crit.lpml.event_terms[j]) + "\n";
  }
  io::write_text(out / "event_terms.csv", events);

  // Posterior mean intensity at the quadrature cell centers.
  std::string surface = "x,y,posterior_mean_intensity\n";
  const auto cov = model.covariates();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Point s = grid.center(c);
    std::vector<double> z(cov.size());
    for (std::size_t j = 0; j < cov.size(); ++j) z[j] = covariate_at(d.fields[cov[j]], s);
    double mean = 0.0;
    for (const auto& t : chain.samples) {
      double eta = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) eta += t.beta[j] * z[j];
      mean += t.lambda0 * std::exp(eta);
    }
    mean /= static_cast<double>(chain.n_kept());
    surface += io::format_double(s.x) + "," + io::format_double(s.y) + "," +
               io::format_double(mean) + "\n";
  }
  io::write_text(out / "intensity.csv", surface);
  io::write_json(out / "manifest.json", manifest);
  std::cout << model.label() << ": dic " << io::format_double(crit.dic.dic) << ", lpml "
            << io::format_double(crit.lpml.lpml) << "\n";
  return 0;
}

// ------------------------------------------------------------------ select

std::vector<ModelSpec> resolve_candidates(const json& cfg, std::size_t p, bool homogeneous) {
  std::vector<ModelSpec> out;
  if (cfg.contains("candidates") && cfg["candidates"].is_array()) {
    for (const auto& c : cfg["candidates"]) out.emplace_back(model_indices(c, p));
    if (homogeneous && std::none_of(out.begin(), out.end(),
                                    [](const ModelSpec& m) { return m.is_homogeneous(); })) {
      out.insert(out.begin(), ModelSpec::homogeneous());
    }
    return out;
  }
  return enumerate_models(static_cast<int>(p), homogeneous);
}

int run_select(const Flags& f) {
  const json cfg = merged_config(f);
  const bool homogeneous = cfg.value("include_homogeneous", false);

  if (cfg.contains("resolutions")) {
    const Region region = region_from(cfg);
    const PointPattern pattern = load_points(cfg, region);
    const PriorSpec prior = prior_from(cfg.value("prior", json("default")));
    const json mcmc_json = resolve_mcmc(cfg);
    const std::uint64_t seed = require_seed(cfg);
    const McmcConfig mcmc = mcmc_from(mcmc_json, seed);
    std::vector<ResolutionInput> inputs;
    json res_json = json::array();
    for (const auto& r : cfg["resolutions"]) {
      ResolutionInput in;
      in.label = r.at("label").get<std::string>();
      in.fields = parse_fields(r.at("fields"));
      check_fields_on(in.fields, region);
      res_json.push_back({{"label", in.label}, {"fields", r.at("fields")}});
      inputs.push_back(std::move(in));
    }
    const std::size_t p = inputs.front().fields.size();
    for (const auto& in : inputs) {
      if (in.fields.size() != p) throw ConfigError("all resolutions need the same covariates");
    }
    const auto candidates = resolve_candidates(cfg, p, homogeneous);
    json cand_json = json::array();
    for (const auto& c : candidates) cand_json.push_back(one_based(c));
    const json manifest = {{"command", "select"}, {"points", cfg["points"]},
                           {"region", region_json(region)}, {"resolutions", res_json},
                           {"candidates", cand_json}, {"prior", prior_json(prior)},
                           {"mcmc", mcmc_json}, {"seed", seed}};
    const fs::path out = prepare_out(f);
    const auto cmp = compare_resolutions(pattern, inputs, candidates, prior, mcmc, f.shared.jobs);
    std::string csv = "resolution,model,dic,p_d,lpml\n";
    json reports = json::array();
    for (std::size_t r = 0; r < cmp.reports.size(); ++r) {
      for (const auto& row : cmp.reports[r].rows) {
        csv += cmp.labels[r] + "," + row.model.label() + ",";
        csv += row.failed ? "NA,NA,NA\n"
                          : io::format_double(row.dic.dic) + "," + io::format_double(row.dic.p_d) +
                                "," + io::format_double(row.lpml.lpml) + "\n";
      }
      json rep = io::to_json(cmp.reports[r]);
      rep["resolution"] = cmp.labels[r];
      reports.push_back(rep);
    }
    json summary = {{"reports", reports}};
    if (cmp.best_dic) {
      summary["best_dic"] = {{"resolution", cmp.labels[cmp.best_dic->first]},
                             {"model", cmp.reports[cmp.best_dic->first]
                                           .rows[cmp.best_dic->second].model.label()}};
    }
    if (cmp.best_lpml) {
      summary["best_lpml"] = {{"resolution", cmp.labels[cmp.best_lpml->first]},
                              {"model", cmp.reports[cmp.best_lpml->first]
                                            .rows[cmp.best_lpml->second].model.label()}};
    }
    io::write_text(out / "resolutions.csv", csv);
    io::write_json(out / "resolutions.json", summary);
    io::write_json(out / "manifest.json", manifest);
    return 0;
  }

  DataConfig d = resolve_data(cfg);
  const auto candidates = resolve_candidates(cfg, d.fields.size(), homogeneous);
  const QuadratureGrid grid = grid_from(cfg, d.fields, d.region);
  const McmcConfig mcmc = mcmc_from(d.mcmc, d.seed);
  json cand_json = json::array();
  for (const auto& c : candidates) cand_json.push_back(one_based(c));
  const json manifest = {{"command", "select"},   {"points", cfg["points"]},
                         {"region", region_json(d.region)}, {"fields", d.field_specs},
                         {"candidates", cand_json}, {"prior", prior_json(d.prior)},
                         {"mcmc", d.mcmc},          {"seed", d.seed},
                         {"grid", grid_json(grid)}};
  const fs::path out = prepare_out(f);
  const auto report =
      select(d.pattern, d.fields, candidates, d.prior, mcmc, grid, f.shared.jobs);
  io::write_text(out / "selection.csv", io::selection_csv(report));
  io::write_json(out / "selection.json", io::to_json(report));
  io::write_json(out / "manifest.json", manifest);
  for (const auto& row : report.rows) {
    if (row.failed) std::cerr << "failed: " << row.error << "\n";
  }
  if (report.winner_dic) {
    std::cout << "DIC winner: " << report.rows[*report.winner_dic].model.label()
              << "\nLPML winner: " << report.rows[*report.winner_lpml].model.label() << "\n";
  }
  return report.winner_dic ? 0 : kExitNumeric;
}

// ------------------------------------------------------------------- study

int run_study(const Flags& f) {
  const json cfg = merged_config(f);
  if (!cfg.contains("preset")) throw ConfigError("'preset' is required (1-4)");
  Scenario sc = scenario_preset(cfg["preset"].get<int>());
  // The preset prior unless overridden.
  if (cfg.contains("prior")) sc.prior = prior_from(cfg["prior"]);
  const int replicates = cfg.value("replicates", 100);
  const std::uint64_t seed = require_seed(cfg);
  const json mcmc_json = resolve_mcmc(cfg);
  const McmcConfig mcmc = mcmc_from(mcmc_json, seed);
  const json manifest = {{"command", "study"},
                         {"preset", sc.id},
                         {"replicates", replicates},
                         {"prior", prior_json(sc.prior)},
                         {"seed", seed},
                         {"mcmc", mcmc_json}};
  const fs::path out = prepare_out(f);
  const StudyReport report = replicate_study(sc, replicates, seed, mcmc, f.shared.jobs);
  io::write_text(out / "study.csv", io::study_csv(report));
  io::write_text(out / "study_differences.csv", io::study_differences_csv(report));
  io::write_json(out / "study.json", io::to_json(report));
  io::write_json(out / "manifest.json", manifest);
  std::cout << report.title << ": " << replicates - static_cast<int>(report.n_excluded)
            << " replicates used, " << report.n_excluded << " excluded, mean count "
            << io::format_double(report.mean_count) << "\n";
  return 0;
}

// ------------------------------------------------------------------ oracle

int run_oracle(const Flags& f) {
  const json cfg = merged_config(f);
  const std::vector<int> schedule =
      cfg.value("schedule", std::vector<int>{25, 50, 100, 200});
  if (schedule.empty()) throw ConfigError("'schedule' must not be empty");
  for (int n : schedule) {
    if (n < 1) throw ConfigError("schedule entries must be >= 1");
  }
  const int finest = *std::max_element(schedule.begin(), schedule.end());
  const std::vector<int> lg = cfg.value("lpml_grid", std::vector<int>{finest, finest});
  if (lg.size() != 2) throw ConfigError("'lpml_grid' must be [nx, ny]");

  json manifest = {{"command", "oracle"}, {"schedule", schedule}, {"lpml_grid", lg}};
  Chain chain;
  PointPattern pattern;
  std::vector<CovariateField> fields;
  Region region;
  if (cfg.contains("fixture")) {
    if (cfg["fixture"] != "two-sample") {
      throw ConfigError("unknown fixture '" + cfg["fixture"].dump() + "' (expected two-sample)");
    }
    manifest["fixture"] = "two-sample";
    chain.samples = {{1.0, {}}, {2.0, {}}};
    pattern = PointPattern({{0.5, 0.5}}, region);
  } else {
    region = region_from(cfg);
    const json field_specs = cfg.value("fields", json::array());
    fields = parse_fields(field_specs);
    pattern = load_points(cfg, region);
    if (!cfg.contains("chain")) throw ConfigError("'chain' or 'fixture' is required");
    const std::string path = cfg["chain"].get<std::string>();
    require_file(path, "chain");
    chain = io::read_chain_csv(path);
    chain.spec.check_against(fields.size());
    manifest["points"] = cfg["points"];
    manifest["chain"] = path;
    manifest["fields"] = field_specs;
    manifest["region"] = region_json(region);
  }
  const fs::path out = prepare_out(f);
  const auto rows =
      oracle_convergence(chain, fields, pattern, schedule, QuadratureGrid(region, lg[0], lg[1]));
  io::write_text(out / "oracle.csv", io::oracle_csv(rows));
  io::write_json(out / "manifest.json", manifest);
  for (const auto& r : rows) {
    std::cout << r.n << "x" << r.n << ": oracle " << io::format_double(r.oracle) << ", |diff| "
              << io::format_double(r.abs_diff) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian NHPP regression: simulation, fitting, DIC/LPML selection"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "simulate a scenario preset");
  add_shared(sim, f.shared);
  track(f, "preset", sim->add_option("--preset", f.preset, "scenario 1-4"));
  track(f, "method", sim->add_option("--method", f.method, "percell or thinning"));

  auto* fit = app.add_subcommand("fit", "fit one model");
  add_shared(fit, f.shared);
  add_data_flags(fit, f);
  add_chain_flags(fit, f);
  track(f, "model", fit->add_option("--model", f.model, "1-based covariate indices, e.g. 1,3"));
  track(f, "level", fit->add_option("--level", f.level, "HPD level"));

  auto* sel = app.add_subcommand("select", "score candidate models by DIC and LPML");
  add_shared(sel, f.shared);
  add_data_flags(sel, f);
  add_chain_flags(sel, f);
  track(f, "include_homogeneous",
        sel->add_flag("--include-homogeneous", f.include_homogeneous, "add the homogeneous model"));

  auto* study = app.add_subcommand("study", "replicate study of a scenario preset");
  add_shared(study, f.shared);
  add_chain_flags(study, f);
  track(f, "preset", study->add_option("--preset", f.preset, "scenario 1-4"));
  track(f, "replicates", study->add_option("--replicates", f.replicates, "number of replicates"));
  track(f, "prior",
        study->add_option("--prior", f.prior, "default or simulation; the preset's if unset"));

  auto* orc = app.add_subcommand("oracle", "partition-count LPML convergence table");
  add_shared(orc, f.shared);
  track(f, "fixture", orc->add_option("--fixture", f.fixture, "built-in chain: two-sample"));
  track(f, "chain", orc->add_option("--chain", f.chain, "chain CSV from fit"));
  track(f, "points", orc->add_option("--points", f.points, "point pattern CSV"));
  track(f, "fields", orc->add_option("--fields", f.fields, "covariates of the chain's model"));
  track(f, "region", orc->add_option("--region", f.region, "xmin,xmax,ymin,ymax"));
  track(f, "schedule", orc->add_option("--schedule", f.schedule, "partition sizes, e.g. 25,50"));
  track(f, "lpml_grid", orc->add_option("--lpml-grid", f.lpml_grid, "LPML grid as nx,ny"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(f);
    if (fit->parsed()) return run_fit(f);
    if (sel->parsed()) return run_select(f);
    if (study->parsed()) return run_study(f);
    return run_oracle(f);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    std::cerr << "run 'nhpp <command> --help' for usage\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}
