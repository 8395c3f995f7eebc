#include "nhpp/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <tuple>

#include "nhpp/error.hpp"
#include "nhpp/parallel.hpp"

namespace nhpp {

void GrfSpec::validate() const {
  if (!std::isfinite(mean) || !(variance >= 0.0) || !(nugget >= 0.0) || !(scale > 0.0)) {
    throw ConfigError("GRF parameters need variance >= 0, nugget >= 0 and scale > 0");
  }
  if (nx < 1 || ny < 1) throw ConfigError("GRF grid dimensions must be >= 1");
}

namespace {

constexpr int kDenseLimit = 64 * 64;

using Complex = std::complex<double>;

// In-place 2-D DFT. Only the first `keep_cols` columns of the result are
// valid; the column pass skips the rest.
void fft2(std::vector<Complex>& data, int mx, int my, int keep_cols) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in;
  std::vector<Complex> out;
  in.resize(static_cast<std::size_t>(mx));
  for (int iy = 0; iy < my; ++iy) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(iy) * mx, mx, in.begin());
    fft.fwd(out, in);
    std::copy_n(out.begin(), mx, data.begin() + static_cast<std::ptrdiff_t>(iy) * mx);
  }
  in.resize(static_cast<std::size_t>(my));
  for (int ix = 0; ix < keep_cols; ++ix) {
    for (int iy = 0; iy < my; ++iy) in[iy] = data[static_cast<std::size_t>(iy) * mx + ix];
    fft.fwd(out, in);
    for (int iy = 0; iy < my; ++iy) data[static_cast<std::size_t>(iy) * mx + ix] = out[iy];
  }
}

// Eigenvalues of the circulant embedding of the unit-variance exponential
// kernel, on an mx x my torus.
struct Spectrum {
  int mx = 0;
  int my = 0;
  std::vector<double> eigen;
};

std::shared_ptr<const Spectrum> embedding_spectrum(int nx, int ny, double hx, double hy,
                                                   double scale) {
  using Key = std::tuple<int, int, double, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Spectrum>> cache;
  const Key key{nx, ny, hx, hy, scale};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  for (int factor = 2; factor <= 32; factor *= 2) {
    auto spectrum = std::make_shared<Spectrum>();
    const int mx = factor * nx;
    const int my = factor * ny;
    std::vector<Complex> base(static_cast<std::size_t>(mx) * my);
    for (int iy = 0; iy < my; ++iy) {
      const double dy = std::min(iy, my - iy) * hy;
      for (int ix = 0; ix < mx; ++ix) {
        const double dx = std::min(ix, mx - ix) * hx;
        base[static_cast<std::size_t>(iy) * mx + ix] = std::exp(-std::hypot(dx, dy) / scale);
      }
    }
    fft2(base, mx, my, mx);
    double max_eigen = 0.0;
    double min_eigen = 0.0;
    double negative_mass = 0.0;
    double total_mass = 0.0;
    spectrum->eigen.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double v = base[i].real();
      spectrum->eigen[i] = v;
      max_eigen = std::max(max_eigen, v);
      min_eigen = std::min(min_eigen, v);
      total_mass += std::abs(v);
      if (v < 0.0) negative_mass -= v;
    }
    const bool last = factor == 32;
    if (min_eigen >= -1e-10 * max_eigen || (last && negative_mass < 1e-6 * total_mass)) {
      for (double& v : spectrum->eigen) v = std::max(v, 0.0);
      spectrum->mx = mx;
      spectrum->my = my;
      std::lock_guard lock(mutex);
      return cache.emplace(key, std::move(spectrum)).first->second;
    }
  }
  throw GenerationError("circulant embedding of the exponential kernel is not nonnegative "
                        "definite even at 32x padding");
}

std::vector<double> circulant_draw(const GrfSpec& spec, const QuadratureGrid& grid,
                                   std::mt19937_64& rng) {
  const auto spectrum =
      embedding_spectrum(spec.nx, spec.ny, grid.cell_width(), grid.cell_height(), spec.scale);
  const int mx = spectrum->mx;
  const int my = spectrum->my;
  const double total = static_cast<double>(mx) * my;
  std::normal_distribution<double> normal;
  std::vector<Complex> w(spectrum->eigen.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double s = std::sqrt(spec.variance * spectrum->eigen[i] / total);
    const double re = normal(rng);
    const double im = normal(rng);
    w[i] = Complex(s * re, s * im);
  }
  fft2(w, mx, my, spec.nx);
  std::vector<double> field(grid.size());
  for (int iy = 0; iy < spec.ny; ++iy) {
    for (int ix = 0; ix < spec.nx; ++ix) {
      field[static_cast<std::size_t>(iy) * spec.nx + ix] =
          w[static_cast<std::size_t>(iy) * mx + ix].real();
    }
  }
  return field;
}

std::vector<double> cholesky_draw(const GrfSpec& spec, const QuadratureGrid& grid,
                                  std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point a = grid.center(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Point b = grid.center(static_cast<std::size_t>(j));
      const double c = spec.variance * std::exp(-std::hypot(a.x - b.x, a.y - b.y) / spec.scale);
      cov(i, j) = c;
      cov(j, i) = c;
    }
    cov(i, i) += 1e-10;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw GenerationError("GRF covariance is not positive definite after jitter; use a grid "
                          "larger than 64x64 to switch to circulant embedding");
  }
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  const Eigen::VectorXd x = llt.matrixL() * z;
  return {x.data(), x.data() + n};
}

}  // namespace

CovariateField simulate_grf(const GrfSpec& spec, const Region& region, std::uint64_t seed,
                            std::string name) {
  spec.validate();
  const QuadratureGrid grid(region, spec.nx, spec.ny);
  std::mt19937_64 rng(seed);
  std::vector<double> values(grid.size(), 0.0);
  if (spec.variance > 0.0) {
    values = static_cast<int>(grid.size()) <= kDenseLimit ? cholesky_draw(spec, grid, rng)
                                                          : circulant_draw(spec, grid, rng);
  }
  std::normal_distribution<double> normal;
  const double tau = std::sqrt(spec.nugget);
  for (double& v : values) {
    v += spec.mean;
    if (tau > 0.0) v += tau * normal(rng);
  }
  return CovariateField::raster(Raster(grid, std::move(values)), std::move(name));
}

double observable_log_intensity(const IntensitySpec& spec, const Point& s) {
  double eta = std::log(spec.lambda0);
  for (const auto& term : spec.terms) {
    if (term.coefficient != 0.0) eta += term.coefficient * covariate_at(term.field, s);
  }
  return eta;
}

double expected_count(const IntensitySpec& spec, const QuadratureGrid& grid) {
  if (spec.latent_field) {
    throw ConfigError("expected count is undefined before the latent field is drawn");
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    sum += std::exp(observable_log_intensity(spec, grid.center(c)));
  }
  return grid.region().area() * sum / static_cast<double>(grid.size());
}

namespace {

void check_intensity(const IntensitySpec& spec) {
  if (!(spec.lambda0 > 0.0) || !std::isfinite(spec.lambda0)) {
    throw ConfigError("lambda0 must be positive and finite");
  }
  for (const auto& term : spec.terms) {
    if (!std::isfinite(term.coefficient)) throw ConfigError("coefficients must be finite");
  }
  if (spec.latent_field) spec.latent_field->validate();
}

}  // namespace

PointPattern simulate_nhpp(const IntensitySpec& spec, const Region& region,
                           const SimulationMethod& method, std::uint64_t seed) {
  check_intensity(spec);
  std::optional<Raster> latent;
  if (spec.latent_field) {
    auto field = simulate_grf(*spec.latent_field, region, derive_seed(seed, 0x1A7E47ULL));
    latent = *field.as_raster();
  }
  auto lambda = [&](const Point& s) {
    double eta = observable_log_intensity(spec, s);
    if (latent) eta += latent->at(s);
    const double value = std::exp(eta);
    if (!std::isfinite(value)) throw GenerationError("intensity is not finite on the region");
    return value;
  };

  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> points;

  if (const auto* cells = std::get_if<PerCell>(&method)) {
    const QuadratureGrid grid(region, cells->nx, cells->ny);
    const double area = grid.cell_area();
    const double w = grid.cell_width();
    const double h = grid.cell_height();
    for (int iy = 0; iy < grid.ny(); ++iy) {
      for (int ix = 0; ix < grid.nx(); ++ix) {
        const Point c = grid.center(ix, iy);
        const double mu = lambda(c) * area;
        if (!(mu > 0.0)) continue;
        std::poisson_distribution<long> poisson(mu);
        const long n = poisson(rng);
        for (long i = 0; i < n; ++i) {
          points.push_back({c.x + (unit(rng) - 0.5) * w, c.y + (unit(rng) - 0.5) * h});
        }
      }
    }
  } else {
    const QuadratureGrid probe(region, 200, 200);
    double lambda_max = 0.0;
    for (std::size_t c = 0; c < probe.size(); ++c) {
      lambda_max = std::max(lambda_max, lambda(probe.center(c)));
    }
    lambda_max *= 1.2;
    if (lambda_max > 0.0) {
      std::poisson_distribution<long> poisson(lambda_max * region.area());
      const long n = poisson(rng);
      for (long i = 0; i < n; ++i) {
        const Point s{region.xmin() + unit(rng) * region.width(),
                      region.ymin() + unit(rng) * region.height()};
        const double value = lambda(s);
        if (value > lambda_max) {
          throw GenerationError("thinning bound violated: intensity exceeds the dominating "
                                "rate; increase the inflation factor");
        }
        if (unit(rng) * lambda_max < value) points.push_back(s);
      }
    }
  }
  return PointPattern(std::move(points), region);
}

namespace {

ModelSpec model(std::initializer_list<std::size_t> covariates, std::string name) {
  return ModelSpec(std::vector<std::size_t>(covariates), std::move(name));
}

GrfSpec scenario_grf(double mean) { return GrfSpec{mean, 1.0, 1.0, 0.2, 100, 100}; }

}  // namespace

Scenario scenario_preset(int id) {
  Scenario s;
  s.id = id;
  s.region = Region{};
  s.grid = QuadratureGrid(s.region, 100, 100);
  s.prior = PriorSpec::simulation();
  const Region region = s.region;

  switch (id) {
    case 1: {
      s.title = "lambda0 * exp(2 x + 0 y + 1 xy)";
      s.candidates = {model({0}, "Model 1 (beta_1)"),          model({1}, "Model 2 (beta_2)"),
                      model({2}, "Model 3 (beta_3)"),          model({0, 1}, "Model 4 (beta_1,beta_2)"),
                      model({0, 2}, "DGM (beta_1,beta_3)"),    model({1, 2}, "Model 5 (beta_2,beta_3)"),
                      model({0, 1, 2}, "Model 6 (beta_1,beta_2,beta_3)")};
      s.true_model = 4;
      s.draw = [](std::uint64_t) {
        ScenarioDraw d;
        d.fitting_fields = {CovariateField::coord_x(), CovariateField::coord_y(),
                            CovariateField::product()};
        d.truth.lambda0 = 30.0;
        d.truth.terms = {{d.fitting_fields[0], 2.0},
                         {d.fitting_fields[1], 0.0},
                         {d.fitting_fields[2], 1.0}};
        return d;
      };
      break;
    }
    case 2: {
      s.title = "lambda0 * exp(4 x^2)";
      s.candidates = {model({0}, "DGM"), model({1}, "Model 1"), model({2}, "Model 2"),
                      model({1, 2}, "Model 3")};
      s.true_model = 0;
      s.draw = [](std::uint64_t) {
        ScenarioDraw d;
        d.fitting_fields = {CovariateField::square_x(), CovariateField::coord_x(),
                            CovariateField::coord_y()};
        d.truth.lambda0 = 50.0;
        d.truth.terms = {{d.fitting_fields[0], 4.0}};
        return d;
      };
      break;
    }
    case 3: {
      s.title = "exp(2 Z1 + 1 Z2), Z1..Z4 Gaussian random fields";
      const char* names[] = {"beta_1", "beta_2", "beta_3", "beta_4"};
      std::vector<std::vector<std::size_t>> subsets = {
          {0}, {1}, {2}, {3}, {0, 1}, {0, 2}, {0, 3}, {1, 2},
          {1, 3}, {2, 3}, {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}, {0, 1, 2, 3}};
      int number = 1;
      for (const auto& subset : subsets) {
        std::string inner;
        for (std::size_t j : subset) inner += (inner.empty() ? "" : ",") + std::string(names[j]);
        const bool dgm = subset == std::vector<std::size_t>{0, 1};
        const std::string label =
            dgm ? "DGM (" + inner + ")" : "Model " + std::to_string(number++) + " (" + inner + ")";
        s.candidates.emplace_back(subset, label);
      }
      s.true_model = 4;
      s.draw = [region](std::uint64_t seed) {
        ScenarioDraw d;
        for (int j = 0; j < 4; ++j) {
          d.fitting_fields.push_back(simulate_grf(scenario_grf(1.0), region,
                                                  derive_seed(seed, static_cast<std::uint64_t>(j)),
                                                  "Z" + std::to_string(j + 1)));
        }
        d.truth.lambda0 = 1.0;
        d.truth.terms = {{d.fitting_fields[0], 2.0}, {d.fitting_fields[1], 1.0}};
        return d;
      };
      break;
    }
    case 4: {
      s.title = "exp(4 Z1 + 4 Z2 + W), Z uniform pixels, W latent Gaussian random field";
      s.candidates = {model({0}, "Model 1 (beta_1)"),       model({1}, "Model 2 (beta_2)"),
                      model({2}, "Model 3 (beta_3)"),       model({0, 1}, "DGM (beta_1,beta_2)"),
                      model({0, 2}, "Model 4 (beta_1,beta_3)"), model({1, 2}, "Model 5 (beta_2,beta_3)"),
                      model({0, 1, 2}, "Model 6 (beta_1,beta_2,beta_3)")};
      s.true_model = 3;
      s.draw = [region](std::uint64_t seed) {
        ScenarioDraw d;
        const QuadratureGrid pixels(region, 100, 100);
        for (int j = 0; j < 3; ++j) {
          std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
          std::uniform_real_distribution<double> unit(0.0, 1.0);
          std::vector<double> values(pixels.size());
          for (double& v : values) v = unit(rng);
          d.fitting_fields.push_back(
              CovariateField::raster(Raster(pixels, std::move(values)), "Z" + std::to_string(j + 1)));
        }
        d.truth.lambda0 = 1.0;
        d.truth.terms = {{d.fitting_fields[0], 4.0}, {d.fitting_fields[1], 4.0}};
        d.truth.latent_field = scenario_grf(0.0);
        return d;
      };
      break;
    }
    default:
      throw ConfigError("unknown scenario preset " + std::to_string(id) + " (expected 1-4)");
  }
  return s;
}

}  // namespace nhpp
