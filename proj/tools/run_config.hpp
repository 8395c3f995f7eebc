// Resolution of command configurations: JSON file, then flag overrides, then
// defaults. The resolved form is what gets written as manifest.json.
#ifndef NHPP_TOOLS_RUN_CONFIG_HPP_
#define NHPP_TOOLS_RUN_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nhpp/core.hpp"
#include "nhpp/mcmc.hpp"

namespace nhpp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Loads a config file and makes its relative paths absolute against the
/// file's directory.
json load_config(const fs::path& path);

/// Makes the paths inside `cfg` (points, chain, raster fields, resolution
/// fields) absolute against `base`.
void absolutize_paths(json& cfg, const fs::path& base);

/// Field strings: "x", "y", "xy", "x2", "dist:cx:cy" or "raster:path".
CovariateField parse_field(const std::string& spec);
std::vector<CovariateField> parse_fields(const json& list);
std::vector<std::string> split_list(const std::string& text, char sep = ',');

Region region_from(const json& cfg);
json region_json(const Region& r);

std::uint64_t require_seed(const json& cfg);
PriorSpec prior_from(const json& value);
json prior_json(const PriorSpec& p);

/// Profile first, then the explicit "mcmc" object on top of it. Always
/// returns a complete object.
json resolve_mcmc(const json& cfg);
McmcConfig mcmc_from(const json& resolved, std::uint64_t seed);

/// Explicit [nx, ny] or null for the default.
QuadratureGrid grid_from(const json& cfg, std::span<const CovariateField> fields,
                         const Region& region);

/// Throws IoError when an input file does not exist.
void require_file(const std::string& path, const std::string& what);

}  // namespace nhpp::cli

#endif  // NHPP_TOOLS_RUN_CONFIG_HPP_
