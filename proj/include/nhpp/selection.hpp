#ifndef NHPP_SELECTION_HPP_
#define NHPP_SELECTION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhpp/criteria.hpp"
#include "nhpp/mcmc.hpp"
#include "nhpp/simulate.hpp"

namespace nhpp {

/// All 2^p - 1 nonempty covariate subsets ordered by size, then
/// lexicographically; the homogeneous model comes first when requested.
/// Requires 0 <= p <= 20.
std::vector<ModelSpec> enumerate_models(int p, bool include_homogeneous);

struct ScoredModel {
  ModelSpec model;
  bool failed = false;
  std::string error;
  DicResult dic;
  LpmlResult lpml;
  /// Empty when the chain is shorter than 10 samples.
  std::optional<PosteriorSummary> summary;
  std::vector<double> acceptance;
  std::vector<std::string> warnings;
};

/// sample_posterior followed by DIC and LPML. Errors keep their category and
/// are prefixed with the model label.
ScoredModel fit_and_score(const PointPattern& pattern, std::span<const CovariateField> fields,
                          const ModelSpec& model, const PriorSpec& prior,
                          const McmcConfig& config, const QuadratureGrid& grid);

struct SelectionReport {
  std::vector<ScoredModel> rows;
  /// Indices into rows; empty only when every candidate failed.
  std::optional<std::size_t> winner_dic;
  std::optional<std::size_t> winner_lpml;
};

/// Winner indices over the non-failed rows: smallest DIC and largest LPML.
/// Ties go to the smaller subset, then the lexicographically smaller one.
void pick_winners(SelectionReport& report);

/// Scores every candidate (candidate m is sampled with seed
/// derive_seed(config.seed, m)). A failed fit marks its row and the rest
/// continue.
SelectionReport select(const PointPattern& pattern, std::span<const CovariateField> fields,
                       std::span<const ModelSpec> candidates, const PriorSpec& prior,
                       const McmcConfig& config, const QuadratureGrid& grid, int jobs = 1);

struct ReplicateRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t n_points = 0;
  bool failed = false;
  std::string error;
  std::vector<double> dic;
  std::vector<double> lpml;
  std::vector<double> p_d;
  std::size_t winner_dic = 0;
  std::size_t winner_lpml = 0;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct StudyRow {
  std::string label;
  double avg_dic = 0.0;
  double avg_lpml = 0.0;
  double dic_sel_pct = 0.0;
  double lpml_sel_pct = 0.0;
  /// Differences model minus reference over included replicates.
  Quartiles dic_diff;
  Quartiles lpml_diff;
};

struct StudyReport {
  std::string title;
  std::size_t reference = 0;
  std::vector<StudyRow> rows;
  std::vector<ReplicateRecord> replicates;
  std::size_t n_excluded = 0;
  double mean_count = 0.0;
};

/// Linear-interpolation quantiles (R type 7).
Quartiles quartiles(std::vector<double> values);

/// For each replicate r (seed derive_seed(master_seed, r)): draw covariates,
/// simulate a pattern per cell on the scenario grid, score all candidates
/// and record winners and differences against the scenario's true model.
/// Replicates with a failed fit are excluded from the aggregates and
/// counted. Results do not depend on `jobs`.
StudyReport replicate_study(const Scenario& scenario, int replicates, std::uint64_t master_seed,
                            const McmcConfig& config, int jobs = 1);

/// Aggregates finished replicate records into the table rows.
void aggregate_study(StudyReport& report, std::span<const ModelSpec> candidates);

struct ResolutionInput {
  std::string label;
  std::vector<CovariateField> fields;
};

struct ResolutionComparison {
  std::vector<std::string> labels;
  std::vector<SelectionReport> reports;
  /// (resolution index, row index) of the best pair under each criterion.
  std::optional<std::pair<std::size_t, std::size_t>> best_dic;
  std::optional<std::pair<std::size_t, std::size_t>> best_lpml;
};

/// Runs select() once per covariate resolution, each on the grid of its
/// rasters, and compares the winning (model, resolution) pairs.
ResolutionComparison compare_resolutions(const PointPattern& pattern,
                                         std::span<const ResolutionInput> resolutions,
                                         std::span<const ModelSpec> candidates,
                                         const PriorSpec& prior, const McmcConfig& config,
                                         int jobs = 1);

}  // namespace nhpp

#endif  // NHPP_SELECTION_HPP_
