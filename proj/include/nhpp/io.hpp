#ifndef NHPP_IO_HPP_
#define NHPP_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "nhpp/criteria.hpp"
#include "nhpp/mcmc.hpp"
#include "nhpp/selection.hpp"

namespace nhpp::io {

namespace fs = std::filesystem;

/// CSV with header `x,y`, one event per row.
PointPattern read_pattern_csv(const fs::path& path, const Region& region);
void write_pattern_csv(const fs::path& path, const PointPattern& pattern);

/// Header line `nx ny xmin xmax ymin ymax`, then nx*ny whitespace-separated
/// values row-major from the minimum-y row upward.
Raster read_raster(const fs::path& path);
void write_raster(const fs::path& path, const Raster& raster);

/// CSV with header `iter,lambda0,beta_j,...` where j is the 1-based index of
/// the covariate in the full field list.
void write_chain_csv(const fs::path& path, const Chain& chain);
Chain read_chain_csv(const fs::path& path);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& value);

nlohmann::json to_json(const PosteriorSummary& summary);
nlohmann::json criteria_json(const std::string& model, const DicResult& dic,
                             const LpmlResult& lpml,
                             const std::optional<std::string>& event_terms_file = std::nullopt);
nlohmann::json to_json(const SelectionReport& report);
nlohmann::json to_json(const StudyReport& report);

/// One CSV row per candidate: `model,dic,p_d,lpml`.
std::string selection_csv(const SelectionReport& report);
/// `model,avg_dic,avg_lpml,dic_sel_pct,lpml_sel_pct`.
std::string study_csv(const StudyReport& report);
/// Median and quartiles of the differences against the reference model.
std::string study_differences_csv(const StudyReport& report);
/// `n,oracle,lpml,abs_diff`.
std::string oracle_csv(std::span<const OracleRow> rows);

}  // namespace nhpp::io

#endif  // NHPP_IO_HPP_
