#include "nhpp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nhpp/error.hpp"

namespace nhpp {

ModelSpec::ModelSpec(std::vector<std::size_t> covariates, std::string name)
    : covariates_(std::move(covariates)), name_(std::move(name)) {
  std::sort(covariates_.begin(), covariates_.end());
  if (std::adjacent_find(covariates_.begin(), covariates_.end()) != covariates_.end()) {
    throw ConfigError("model covariate indices must be unique");
  }
}

std::string ModelSpec::label() const {
  if (!name_.empty()) return name_;
  if (covariates_.empty()) return "homogeneous";
  std::string out;
  for (std::size_t j : covariates_) {
    if (!out.empty()) out += ',';
    out += "beta_" + std::to_string(j + 1);
  }
  return out;
}

void ModelSpec::check_against(std::size_t p) const {
  for (std::size_t j : covariates_) {
    if (j >= p) {
      throw ConfigError("model " + label() + " refers to covariate " + std::to_string(j + 1) +
                        " but only " + std::to_string(p) + " are available");
    }
  }
}

void check_theta(const Theta& theta, const ModelSpec& spec) {
  if (theta.beta.size() != spec.dim()) {
    throw ConfigError("theta has " + std::to_string(theta.beta.size()) +
                      " coefficients but model " + spec.label() + " has " +
                      std::to_string(spec.dim()));
  }
  if (!(theta.lambda0 > 0.0) || !std::isfinite(theta.lambda0)) {
    throw ConfigError("lambda0 must be positive and finite");
  }
  for (double b : theta.beta) {
    if (!std::isfinite(b)) throw ConfigError("beta must be finite");
  }
}

double log_intensity(const Theta& theta, const ModelSpec& spec,
                     std::span<const CovariateField> fields, const Point& s) {
  spec.check_against(fields.size());
  check_theta(theta, spec);
  double eta = std::log(theta.lambda0);
  const auto cov = spec.covariates();
  for (std::size_t j = 0; j < cov.size(); ++j) {
    eta += theta.beta[j] * covariate_at(fields[cov[j]], s);
  }
  return eta;
}

double integrated_intensity(const Theta& theta, const ModelSpec& spec,
                            std::span<const CovariateField> fields, const QuadratureGrid& grid) {
  const PointPattern none({}, grid.region());
  const DesignCache cache(spec, fields, none, grid);
  check_theta(theta, spec);
  return theta.lambda0 * cache.integral_factor(theta.beta);
}

double log_likelihood(const Theta& theta, const ModelSpec& spec,
                      std::span<const CovariateField> fields, const PointPattern& pattern,
                      const QuadratureGrid& grid) {
  const DesignCache cache(spec, fields, pattern, grid);
  return cache.log_likelihood(theta);
}

QuadratureGrid default_grid(std::span<const CovariateField> fields, const Region& region) {
  int nx = 0;
  int ny = 0;
  for (const auto& f : fields) {
    if (const Raster* r = f.as_raster()) {
      nx = std::max(nx, r->layout.nx());
      ny = std::max(ny, r->layout.ny());
    }
  }
  if (nx == 0) return {region, 100, 100};
  return {region, nx, ny};
}

DesignCache::DesignCache(const ModelSpec& spec, std::span<const CovariateField> fields,
                         const PointPattern& pattern, const QuadratureGrid& grid)
    : dim_(spec.dim()),
      num_events_(pattern.size()),
      area_(grid.region().area()),
      total_cells_(static_cast<double>(grid.size())),
      grid_(grid) {
  spec.check_against(fields.size());
  if (!(pattern.region() == grid.region())) {
    throw ConfigError("point pattern and quadrature grid are defined on different regions");
  }
  check_fields_on(fields, grid.region());
  const auto cov = spec.covariates();

  event_rows_.reserve(num_events_ * dim_);
  event_sum_.assign(dim_, 0.0);
  for (const auto& s : pattern.points()) {
    for (std::size_t j = 0; j < dim_; ++j) {
      const double z = covariate_at(fields[cov[j]], s);
      event_rows_.push_back(z);
      event_sum_[j] += z;
    }
  }

  std::map<std::vector<double>, std::size_t> seen;
  std::vector<double> row(dim_);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Point center = grid.center(c);
    for (std::size_t j = 0; j < dim_; ++j) row[j] = covariate_at(fields[cov[j]], center);
    auto [it, inserted] = seen.try_emplace(row, counts_.size());
    if (inserted) {
      quad_rows_.insert(quad_rows_.end(), row.begin(), row.end());
      counts_.push_back(1.0);
    } else {
      counts_[it->second] += 1.0;
    }
  }
}

double DesignCache::event_eta(std::span<const double> beta, std::size_t i) const {
  const double* z = event_rows_.data() + i * dim_;
  double eta = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) eta += beta[j] * z[j];
  return eta;
}

void DesignCache::quad_eta(std::span<const double> beta, std::span<double> eta) const {
  const std::size_t m = counts_.size();
  std::fill(eta.begin(), eta.end(), 0.0);
  for (std::size_t j = 0; j < dim_; ++j) {
    const double b = beta[j];
    for (std::size_t u = 0; u < m; ++u) eta[u] += b * quad_rows_[u * dim_ + j];
  }
}

double DesignCache::integral_from_eta(std::span<const double> eta) const {
  double sum = 0.0;
  for (std::size_t u = 0; u < counts_.size(); ++u) sum += counts_[u] * std::exp(eta[u]);
  return area_ * (sum / total_cells_);
}

double DesignCache::integral_factor(std::span<const double> beta) const {
  if (dim_ == 0) return area_;
  std::vector<double> eta(counts_.size());
  quad_eta(beta, eta);
  return integral_from_eta(eta);
}

double DesignCache::event_log_sum(const Theta& theta) const {
  const double log_l0 = std::log(theta.lambda0);
  double sum = 0.0;
  for (std::size_t i = 0; i < num_events_; ++i) {
    const double log_lambda = log_l0 + event_eta(theta.beta, i);
    if (!(std::exp(log_lambda) > 0.0)) {
      throw NumericError("intensity underflows to zero at event " + std::to_string(i));
    }
    sum += log_lambda;
  }
  return sum;
}

double DesignCache::log_likelihood(const Theta& theta) const {
  if (theta.beta.size() != dim_) {
    throw ConfigError("theta dimension does not match the model");
  }
  if (!(theta.lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
  const double value = event_log_sum(theta) - theta.lambda0 * integral_factor(theta.beta);
  if (!std::isfinite(value)) throw NumericError("log-likelihood is not finite");
  return value;
}

}  // namespace nhpp
