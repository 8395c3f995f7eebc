#ifndef NHPP_SIMULATE_HPP_
#define NHPP_SIMULATE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nhpp/core.hpp"
#include "nhpp/likelihood.hpp"
#include "nhpp/mcmc.hpp"

namespace nhpp {

/// Stationary Gaussian field on the cell centers of an nx x ny grid with
/// covariance C(h) = variance * exp(-h / scale) + nugget * 1{h = 0}.
struct GrfSpec {
  double mean = 0.0;
  double variance = 1.0;
  double scale = 1.0;
  double nugget = 0.0;
  int nx = 100;
  int ny = 100;

  void validate() const;
};

/// One draw of the field as a raster covariate. Grids of at most 64 x 64
/// cells use a dense Cholesky factor; larger grids use circulant embedding.
CovariateField simulate_grf(const GrfSpec& spec, const Region& region, std::uint64_t seed,
                            std::string name = "grf");

struct CovariateTerm {
  CovariateField field;
  double coefficient = 0.0;
};

/// lambda(s) = lambda0 * exp(sum_j c_j Z_j(s) + W(s)). W, when present, is
/// drawn afresh inside simulate_nhpp and never returned.
struct IntensitySpec {
  double lambda0 = 1.0;
  std::vector<CovariateTerm> terms;
  std::optional<GrfSpec> latent_field;
};

/// log lambda(s) without the latent field.
double observable_log_intensity(const IntensitySpec& spec, const Point& s);

/// Midpoint-rule expected count of the observable part of the intensity.
/// Throws ConfigError when the intensity has a latent field.
double expected_count(const IntensitySpec& spec, const QuadratureGrid& grid);

/// N_i ~ Poisson(lambda(c_i) |A_i|) per cell, placed uniformly in the cell.
struct PerCell {
  int nx = 100;
  int ny = 100;
};
/// Homogeneous proposals at 1.2 x the maximum over a 200 x 200 probe grid,
/// each kept with probability lambda(s) / lambda_max.
struct Thinning {};
using SimulationMethod = std::variant<PerCell, Thinning>;

PointPattern simulate_nhpp(const IntensitySpec& spec, const Region& region,
                           const SimulationMethod& method, std::uint64_t seed);

/// Covariates for one replicate of a study: the generating intensity and the
/// fields handed to the fitting code (latent fields excluded).
struct ScenarioDraw {
  IntensitySpec truth;
  std::vector<CovariateField> fitting_fields;
};

/// Everything a replicate study needs to generate data and score candidates.
struct Scenario {
  int id = 0;
  std::string title;
  Region region;
  /// Generation cells and fitting quadrature.
  QuadratureGrid grid;
  PriorSpec prior = PriorSpec::simulation();
  std::vector<ModelSpec> candidates;
  /// Index into candidates of the data-generating model.
  std::size_t true_model = 0;
  std::function<ScenarioDraw(std::uint64_t seed)> draw;
};

/// The four simulation designs:
///   1: lambda0 = 30, x, y and x*y with beta = (2, 0, 1); 7 candidates.
///   2: lambda0 = 50, 4 x^2; candidates x^2, x, y and (x, y).
///   3: four GRF covariates (mean 1, variance 1, scale 1, nugget 0.2),
///      lambda0 = 1, beta = (2, 1, 0, 0); all 15 nonempty subsets.
///   4: three U(0, 1) pixel covariates and a latent GRF (mean 0),
///      lambda0 = 1, beta = (4, 4, 0); 7 candidates.
/// Throws ConfigError for any other id.
Scenario scenario_preset(int id);

}  // namespace nhpp

#endif  // NHPP_SIMULATE_HPP_
