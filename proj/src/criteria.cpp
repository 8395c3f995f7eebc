#include "nhpp/criteria.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "nhpp/error.hpp"

namespace nhpp {

namespace {

// Streaming log-sum-exp; the result does not depend on how values are split.
class LogSumExp {
 public:
  void add(double x) {
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ + std::log(sum_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

void check_chain(const Chain& chain, const DesignCache& cache) {
  if (chain.n_kept() == 0) throw ConfigError("criteria need a non-empty chain");
  if (chain.dim() != cache.dim()) throw ConfigError("chain does not match the design");
  for (const auto& t : chain.samples) {
    if (t.beta.size() != cache.dim()) throw ConfigError("chain sample has the wrong dimension");
  }
}

Theta posterior_mean(const Chain& chain) {
  Theta mean{0.0, std::vector<double>(chain.dim(), 0.0)};
  for (const auto& t : chain.samples) {
    mean.lambda0 += t.lambda0;
    for (std::size_t j = 0; j < t.beta.size(); ++j) mean.beta[j] += t.beta[j];
  }
  const double b = static_cast<double>(chain.n_kept());
  mean.lambda0 /= b;
  for (double& v : mean.beta) v /= b;
  return mean;
}

}  // namespace

double deviance(const Theta& theta, const ModelSpec& spec,
                std::span<const CovariateField> fields, const PointPattern& pattern,
                const QuadratureGrid& grid) {
  return -2.0 * log_likelihood(theta, spec, fields, pattern, grid);
}

CriteriaResult score_chain(const DesignCache& cache, const Chain& chain) {
  check_chain(chain, cache);
  const std::size_t k = cache.num_events();
  const std::size_t big_b = chain.n_kept();
  std::vector<LogSumExp> inverse(k);
  std::vector<double> eta(cache.num_unique_rows());

  double dev_sum = 0.0;
  double integral_sum = 0.0;
  for (std::size_t b = 0; b < big_b; ++b) {
    const Theta& t = chain.samples[b];
    if (!(t.lambda0 > 0.0)) {
      throw NumericError("sample " + std::to_string(b) + " has a non-positive lambda0");
    }
    const double log_l0 = std::log(t.lambda0);
    double event_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double log_lambda = log_l0 + cache.event_eta(t.beta, j);
      if (!(std::exp(log_lambda) > 0.0)) {
        throw NumericError("intensity is zero at event " + std::to_string(j) + " for sample " +
                           std::to_string(b));
      }
      event_sum += log_lambda;
      inverse[j].add(-log_lambda);
    }
    double integral = cache.area();
    if (cache.dim() > 0) {
      cache.quad_eta(t.beta, eta);
      integral = cache.integral_from_eta(eta);
    }
    integral *= t.lambda0;
    dev_sum += -2.0 * (event_sum - integral);
    integral_sum += integral;
  }

  CriteriaResult out;
  const double n = static_cast<double>(big_b);
  out.dic.mean_dev = dev_sum / n;
  out.dic.dev_at_mean = -2.0 * cache.log_likelihood(posterior_mean(chain));
  out.dic.p_d = out.dic.mean_dev - out.dic.dev_at_mean;
  out.dic.dic = 2.0 * out.dic.mean_dev - out.dic.dev_at_mean;

  out.lpml.integral_term = integral_sum / n;
  out.lpml.event_terms.reserve(k);
  double events = 0.0;
  const double log_n = std::log(n);
  for (const auto& acc : inverse) {
    const double term = log_n - acc.value();
    out.lpml.event_terms.push_back(term);
    events += term;
  }
  out.lpml.lpml = events - out.lpml.integral_term;
  return out;
}

DicResult dic(const Chain& chain, std::span<const CovariateField> fields,
              const PointPattern& pattern, const QuadratureGrid& grid) {
  const DesignCache cache(chain.spec, fields, pattern, grid);
  return score_chain(cache, chain).dic;
}

LpmlResult lpml(const Chain& chain, std::span<const CovariateField> fields,
                const PointPattern& pattern, const QuadratureGrid& grid) {
  const DesignCache cache(chain.spec, fields, pattern, grid);
  return score_chain(cache, chain).lpml;
}

double lpml_partition_oracle(const Chain& chain, std::span<const CovariateField> fields,
                             const PointPattern& pattern, const QuadratureGrid& partition) {
  if (chain.n_kept() == 0) throw ConfigError("oracle needs a non-empty chain");
  const ModelSpec& spec = chain.spec;
  spec.check_against(fields.size());
  check_fields_on(fields, partition.region());
  const auto counts = count_in_cells(pattern, partition);
  const auto cov = spec.covariates();
  const std::size_t p = spec.dim();

  // Cells sharing a design row and a count contribute identical terms.
  std::map<std::pair<std::vector<double>, int>, std::size_t> index;
  std::vector<std::vector<double>> rows;
  std::vector<int> group_count;
  std::vector<double> multiplicity;
  std::vector<double> row(p);
  for (std::size_t c = 0; c < partition.size(); ++c) {
    const Point center = partition.center(c);
    for (std::size_t j = 0; j < p; ++j) row[j] = covariate_at(fields[cov[j]], center);
    auto [it, inserted] = index.try_emplace({row, counts[c]}, rows.size());
    if (inserted) {
      rows.push_back(row);
      group_count.push_back(counts[c]);
      multiplicity.push_back(1.0);
    } else {
      multiplicity[it->second] += 1.0;
    }
  }

  const double cell = partition.cell_area();
  const double log_b = std::log(static_cast<double>(chain.n_kept()));
  double total = 0.0;
  for (std::size_t g = 0; g < rows.size(); ++g) {
    LogSumExp acc;
    const double n_i = group_count[g];
    for (std::size_t b = 0; b < chain.n_kept(); ++b) {
      const Theta& t = chain.samples[b];
      double log_lambda = std::log(t.lambda0);
      for (std::size_t j = 0; j < p; ++j) log_lambda += t.beta[j] * rows[g][j];
      const double mass = std::exp(log_lambda) * cell;
      if (!(mass < 700.0)) {
        throw NumericError("exp(lambda(A_i)) overflows in the partition oracle; use a finer "
                           "partition");
      }
      acc.add(-n_i * log_lambda + mass - cell);
    }
    total += multiplicity[g] * (log_b - acc.value());
  }
  return total - partition.region().area();
}

std::vector<OracleRow> oracle_convergence(const Chain& chain,
                                          std::span<const CovariateField> fields,
                                          const PointPattern& pattern,
                                          std::span<const int> schedule,
                                          const QuadratureGrid& lpml_grid) {
  const double reference = lpml(chain, fields, pattern, lpml_grid).lpml;
  std::vector<OracleRow> rows;
  for (int n : schedule) {
    const QuadratureGrid partition(pattern.region(), n, n);
    const double value = lpml_partition_oracle(chain, fields, pattern, partition);
    rows.push_back({n, value, reference, std::abs(value - reference)});
  }
  return rows;
}

}  // namespace nhpp
