#include "nhpp/selection.hpp"

#include <algorithm>
#include <cmath>

#include "nhpp/error.hpp"
#include "nhpp/parallel.hpp"

namespace nhpp {

std::vector<ModelSpec> enumerate_models(int p, bool include_homogeneous) {
  if (p < 0 || p > 20) throw ConfigError("number of covariates must lie in [0, 20]");
  if (p == 0 && !include_homogeneous) {
    throw ConfigError("no candidate models: p = 0 without the homogeneous model");
  }
  std::vector<std::vector<std::size_t>> subsets;
  const std::uint32_t total = 1u << p;
  for (std::uint32_t mask = include_homogeneous ? 0u : 1u; mask < total; ++mask) {
    std::vector<std::size_t> s;
    for (int j = 0; j < p; ++j) {
      if (mask & (1u << j)) s.push_back(static_cast<std::size_t>(j));
    }
    subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<ModelSpec> out;
  out.reserve(subsets.size());
  for (auto& s : subsets) out.emplace_back(std::move(s));
  return out;
}

namespace {

[[noreturn]] void rethrow_tagged(const std::string& label) {
  const std::string prefix = "model " + label + ": ";
  try {
    throw;
  } catch (const InitializationError& e) {
    throw InitializationError(prefix + e.what());
  } catch (const GenerationError& e) {
    throw GenerationError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  }
}

bool prefer(const ModelSpec& a, const ModelSpec& b) {
  const auto ca = a.covariates();
  const auto cb = b.covariates();
  if (ca.size() != cb.size()) return ca.size() < cb.size();
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

// Index of the best value; `better(x, y)` is true when x beats y strictly.
template <typename Better>
std::optional<std::size_t> best_index(std::span<const double> values,
                                      std::span<const ModelSpec> models,
                                      std::span<const char> usable, Better better) {
  std::optional<std::size_t> best;
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (!usable[m]) continue;
    if (!best || better(values[m], values[*best]) ||
        (values[m] == values[*best] && prefer(models[m], models[*best]))) {
      best = m;
    }
  }
  return best;
}

}  // namespace

ScoredModel fit_and_score(const PointPattern& pattern, std::span<const CovariateField> fields,
                          const ModelSpec& model, const PriorSpec& prior,
                          const McmcConfig& config, const QuadratureGrid& grid) {
  try {
    const DesignCache cache(model, fields, pattern, grid);
    const Chain chain = sample_posterior(cache, model, prior, config);
    const CriteriaResult scores = score_chain(cache, chain);
    ScoredModel out;
    out.model = model;
    out.dic = scores.dic;
    out.lpml = scores.lpml;
    if (chain.n_kept() >= 10) out.summary = posterior_summary(chain);
    out.acceptance = chain.acceptance_rate_beta;
    out.warnings = chain.warnings;
    return out;
  } catch (const Error&) {
    rethrow_tagged(model.label());
  }
}

void pick_winners(SelectionReport& report) {
  const std::size_t n = report.rows.size();
  std::vector<double> dics(n);
  std::vector<double> lpmls(n);
  std::vector<ModelSpec> models(n);
  std::vector<char> usable(n);
  for (std::size_t m = 0; m < n; ++m) {
    dics[m] = report.rows[m].dic.dic;
    lpmls[m] = report.rows[m].lpml.lpml;
    models[m] = report.rows[m].model;
    usable[m] = report.rows[m].failed ? 0 : 1;
  }
  report.winner_dic = best_index(dics, models, usable, [](double a, double b) { return a < b; });
  report.winner_lpml = best_index(lpmls, models, usable, [](double a, double b) { return a > b; });
}

SelectionReport select(const PointPattern& pattern, std::span<const CovariateField> fields,
                       std::span<const ModelSpec> candidates, const PriorSpec& prior,
                       const McmcConfig& config, const QuadratureGrid& grid, int jobs) {
  if (candidates.empty()) throw ConfigError("candidate set is empty");
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    candidates[a].check_against(fields.size());
    for (std::size_t b = 0; b < a; ++b) {
      if (candidates[a] == candidates[b]) {
        throw ConfigError("candidate set contains " + candidates[a].label() + " twice");
      }
    }
  }
  SelectionReport report;
  report.rows.resize(candidates.size());
  parallel_for(candidates.size(), jobs, [&](std::size_t m) {
    McmcConfig local = config;
    local.seed = derive_seed(config.seed, m);
    try {
      report.rows[m] = fit_and_score(pattern, fields, candidates[m], prior, local, grid);
    } catch (const Error& e) {
      report.rows[m].model = candidates[m];
      report.rows[m].failed = true;
      report.rows[m].error = e.what();
    }
  });
  pick_winners(report);
  return report;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double h = (values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - lo) * (values[hi] - values[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

void aggregate_study(StudyReport& report, std::span<const ModelSpec> candidates) {
  const std::size_t m = candidates.size();
  report.rows.assign(m, StudyRow{});
  std::vector<std::vector<double>> dic_diff(m);
  std::vector<std::vector<double>> lpml_diff(m);
  std::vector<double> dic_wins(m, 0.0);
  std::vector<double> lpml_wins(m, 0.0);
  double included = 0.0;
  double count_sum = 0.0;
  report.n_excluded = 0;
  for (const auto& rep : report.replicates) {
    if (rep.failed) {
      ++report.n_excluded;
      continue;
    }
    included += 1.0;
    count_sum += static_cast<double>(rep.n_points);
    dic_wins[rep.winner_dic] += 1.0;
    lpml_wins[rep.winner_lpml] += 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      report.rows[j].avg_dic += rep.dic[j];
      report.rows[j].avg_lpml += rep.lpml[j];
      dic_diff[j].push_back(rep.dic[j] - rep.dic[report.reference]);
      lpml_diff[j].push_back(rep.lpml[j] - rep.lpml[report.reference]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto& row = report.rows[j];
    row.label = candidates[j].label();
    if (included > 0.0) {
      row.avg_dic /= included;
      row.avg_lpml /= included;
      row.dic_sel_pct = 100.0 * dic_wins[j] / included;
      row.lpml_sel_pct = 100.0 * lpml_wins[j] / included;
    }
    row.dic_diff = quartiles(dic_diff[j]);
    row.lpml_diff = quartiles(lpml_diff[j]);
  }
  report.mean_count = included > 0.0 ? count_sum / included : 0.0;
}

StudyReport replicate_study(const Scenario& scenario, int replicates, std::uint64_t master_seed,
                            const McmcConfig& config, int jobs) {
  if (replicates < 1) throw ConfigError("a study needs at least one replicate");
  if (!scenario.draw) throw ConfigError("scenario has no data generator");
  if (scenario.true_model >= scenario.candidates.size()) {
    throw ConfigError("scenario reference model is not a candidate");
  }
  config.validate();
  scenario.prior.validate();
  const std::size_t r_count = static_cast<std::size_t>(replicates);
  const std::size_t m_count = scenario.candidates.size();

  StudyReport report;
  report.title = scenario.title;
  report.reference = scenario.true_model;
  report.replicates.resize(r_count);

  struct Data {
    std::vector<CovariateField> fields;
    PointPattern pattern;
  };
  std::vector<Data> data(r_count);
  parallel_for(r_count, jobs, [&](std::size_t r) {
    auto& rec = report.replicates[r];
    rec.index = r;
    rec.seed = derive_seed(master_seed, r);
    rec.dic.assign(m_count, 0.0);
    rec.lpml.assign(m_count, 0.0);
    rec.p_d.assign(m_count, 0.0);
    try {
      ScenarioDraw draw = scenario.draw(derive_seed(rec.seed, 0));
      data[r].pattern = simulate_nhpp(draw.truth, scenario.region,
                                      PerCell{scenario.grid.nx(), scenario.grid.ny()},
                                      derive_seed(rec.seed, 1));
      data[r].fields = std::move(draw.fitting_fields);
      rec.n_points = data[r].pattern.size();
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = std::string("generation: ") + e.what();
    }
  });

  std::vector<std::string> errors(r_count * m_count);
  parallel_for(r_count * m_count, jobs, [&](std::size_t task) {
    const std::size_t r = task / m_count;
    const std::size_t m = task % m_count;
    auto& rec = report.replicates[r];
    if (rec.failed) return;
    McmcConfig local = config;
    local.seed = derive_seed(rec.seed, 2 + m);
    try {
      const ScoredModel scored = fit_and_score(data[r].pattern, data[r].fields,
                                               scenario.candidates[m], scenario.prior, local,
                                               scenario.grid);
      rec.dic[m] = scored.dic.dic;
      rec.lpml[m] = scored.lpml.lpml;
      rec.p_d[m] = scored.dic.p_d;
    } catch (const Error& e) {
      errors[task] = e.what();
    }
  });

  for (std::size_t r = 0; r < r_count; ++r) {
    auto& rec = report.replicates[r];
    if (rec.failed) continue;
    for (std::size_t m = 0; m < m_count; ++m) {
      if (!errors[r * m_count + m].empty()) {
        rec.failed = true;
        rec.error = errors[r * m_count + m];
        break;
      }
    }
    if (rec.failed) continue;
    SelectionReport sel;
    sel.rows.resize(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      sel.rows[m].model = scenario.candidates[m];
      sel.rows[m].dic.dic = rec.dic[m];
      sel.rows[m].lpml.lpml = rec.lpml[m];
    }
    pick_winners(sel);
    rec.winner_dic = *sel.winner_dic;
    rec.winner_lpml = *sel.winner_lpml;
  }
  aggregate_study(report, scenario.candidates);
  return report;
}

ResolutionComparison compare_resolutions(const PointPattern& pattern,
                                         std::span<const ResolutionInput> resolutions,
                                         std::span<const ModelSpec> candidates,
                                         const PriorSpec& prior, const McmcConfig& config,
                                         int jobs) {
  if (resolutions.empty()) throw ConfigError("no covariate resolutions to compare");
  ResolutionComparison out;
  for (const auto& res : resolutions) {
    const QuadratureGrid grid = default_grid(res.fields, pattern.region());
    out.labels.push_back(res.label);
    out.reports.push_back(select(pattern, res.fields, candidates, prior, config, grid, jobs));
  }
  for (std::size_t r = 0; r < out.reports.size(); ++r) {
    const auto& rep = out.reports[r];
    if (rep.winner_dic) {
      const double v = rep.rows[*rep.winner_dic].dic.dic;
      if (!out.best_dic ||
          v < out.reports[out.best_dic->first].rows[out.best_dic->second].dic.dic) {
        out.best_dic = {{r, *rep.winner_dic}};
      }
    }
    if (rep.winner_lpml) {
      const double v = rep.rows[*rep.winner_lpml].lpml.lpml;
      if (!out.best_lpml ||
          v > out.reports[out.best_lpml->first].rows[out.best_lpml->second].lpml.lpml) {
        out.best_lpml = {{r, *rep.winner_lpml}};
      }
    }
  }
  return out;
}

}  // namespace nhpp
