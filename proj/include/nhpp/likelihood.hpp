#ifndef NHPP_LIKELIHOOD_HPP_
#define NHPP_LIKELIHOOD_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nhpp/core.hpp"

namespace nhpp {

/// A covariate subset of the full field list. Indices are 0-based positions
/// in that list, kept sorted and unique; an empty subset is the homogeneous
/// model. The baseline lambda0 is always part of the model.
class ModelSpec {
 public:
  ModelSpec() = default;
  explicit ModelSpec(std::vector<std::size_t> covariates, std::string name = {});

  static ModelSpec homogeneous() { return ModelSpec{}; }

  std::span<const std::size_t> covariates() const { return covariates_; }
  std::size_t dim() const { return covariates_.size(); }
  bool is_homogeneous() const { return covariates_.empty(); }

  /// Custom name when given, otherwise "beta_1,beta_3" style (1-based) or
  /// "homogeneous".
  std::string label() const;
  const std::string& name() const { return name_; }

  /// Throws ConfigError when an index is >= p.
  void check_against(std::size_t p) const;

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    return a.covariates_ == b.covariates_;
  }

 private:
  std::vector<std::size_t> covariates_;
  std::string name_;
};

/// Model parameters (lambda0, beta); beta follows ModelSpec::covariates().
struct Theta {
  double lambda0 = 1.0;
  std::vector<double> beta;

  friend bool operator==(const Theta&, const Theta&) = default;
};

/// Throws ConfigError on a dimension mismatch or lambda0 <= 0 / non-finite beta.
void check_theta(const Theta& theta, const ModelSpec& spec);

/// log lambda0 + sum_j beta_j Z_j(s) over the active covariates.
double log_intensity(const Theta& theta, const ModelSpec& spec,
                     std::span<const CovariateField> fields, const Point& s);

/// Midpoint-rule integral of lambda over the grid region.
double integrated_intensity(const Theta& theta, const ModelSpec& spec,
                            std::span<const CovariateField> fields, const QuadratureGrid& grid);

/// sum_i log lambda(s_i) - integral of lambda. Throws NumericError naming
/// the first event whose intensity underflows to zero.
double log_likelihood(const Theta& theta, const ModelSpec& spec,
                      std::span<const CovariateField> fields, const PointPattern& pattern,
                      const QuadratureGrid& grid);

/// Grid used when none is given: the resolution of the finest raster
/// covariate, or 100x100 when all covariates are analytic.
QuadratureGrid default_grid(std::span<const CovariateField> fields, const Region& region);

/// Design rows of one model, evaluated once and shared read-only by the
/// sampler and the criteria.
///
/// Quadrature rows are deduplicated: cells whose active covariates coincide
/// (e.g. every cell in a column when only the x coordinate is active) are
/// stored once with a multiplicity, so the integral costs one exp per
/// distinct row rather than per cell.
class DesignCache {
 public:
  DesignCache(const ModelSpec& spec, std::span<const CovariateField> fields,
              const PointPattern& pattern, const QuadratureGrid& grid);

  std::size_t dim() const { return dim_; }
  std::size_t num_events() const { return num_events_; }
  std::size_t num_unique_rows() const { return counts_.size(); }
  double area() const { return area_; }
  const QuadratureGrid& grid() const { return grid_; }

  /// Row i of the event design (k x p).
  std::span<const double> event_row(std::size_t i) const {
    return {event_rows_.data() + i * dim_, dim_};
  }
  /// Column sums of the event design.
  std::span<const double> event_sum() const { return event_sum_; }

  std::span<const double> quad_row(std::size_t u) const {
    return {quad_rows_.data() + u * dim_, dim_};
  }
  std::span<const double> quad_rows() const { return quad_rows_; }
  std::span<const double> quad_counts() const { return counts_; }

  /// beta . Z(s_i) for event i.
  double event_eta(std::span<const double> beta, std::size_t i) const;

  /// C(beta) = integral of exp(beta . Z(s)) ds by the midpoint rule.
  double integral_factor(std::span<const double> beta) const;

  /// integral_factor() from precomputed linear predictors, one per unique row.
  double integral_from_eta(std::span<const double> eta) const;

  /// Fills `eta` with beta . Z for every unique quadrature row.
  void quad_eta(std::span<const double> beta, std::span<double> eta) const;

  /// Per-event log lambda summed in event order; throws NumericError on underflow.
  double event_log_sum(const Theta& theta) const;

  double log_likelihood(const Theta& theta) const;

 private:
  std::size_t dim_ = 0;
  std::size_t num_events_ = 0;
  double area_ = 1.0;
  double total_cells_ = 1.0;
  QuadratureGrid grid_;
  std::vector<double> event_rows_;
  std::vector<double> event_sum_;
  std::vector<double> quad_rows_;
  std::vector<double> counts_;
};

}  // namespace nhpp

#endif  // NHPP_LIKELIHOOD_HPP_
