#ifndef NHPP_CRITERIA_HPP_
#define NHPP_CRITERIA_HPP_

#include <span>
#include <vector>

#include "nhpp/likelihood.hpp"
#include "nhpp/mcmc.hpp"

namespace nhpp {

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;
  double dev_at_mean = 0.0;
  double mean_dev = 0.0;
};

struct LpmlResult {
  double lpml = 0.0;
  /// log of the posterior harmonic mean intensity at each event.
  std::vector<double> event_terms;
  /// Integral of the posterior mean intensity over the region.
  double integral_term = 0.0;
};

struct CriteriaResult {
  DicResult dic;
  LpmlResult lpml;
};

/// -2 x log-likelihood.
double deviance(const Theta& theta, const ModelSpec& spec,
                std::span<const CovariateField> fields, const PointPattern& pattern,
                const QuadratureGrid& grid);

/// Both criteria in one pass over the chain, sharing the per-sample
/// intensity integrals. Samples are reduced in chain order, events in
/// pattern order.
///
/// DIC plugs in the componentwise posterior mean (lambda0 on its natural
/// scale). The LPML event term is log of the harmonic mean of
/// lambda(s_j | theta_b) over samples, accumulated in log space; the integral
/// term averages the per-sample midpoint integrals, which equals the
/// midpoint integral of the pointwise posterior mean surface.
CriteriaResult score_chain(const DesignCache& cache, const Chain& chain);

DicResult dic(const Chain& chain, std::span<const CovariateField> fields,
              const PointPattern& pattern, const QuadratureGrid& grid);
LpmlResult lpml(const Chain& chain, std::span<const CovariateField> fields,
                const PointPattern& pattern, const QuadratureGrid& grid);

/// Partition-count LPML against a unit-intensity reference process:
/// sum_i log CPO_i - |B| where
///   CPO_i^{-1} = mean_b (lambda_b(A_i)/|A_i|)^{-N_i} exp(lambda_b(A_i) - |A_i|)
/// and lambda_b(A_i) is approximated by lambda_b(center_i) |A_i|. Approaches
/// lpml() as the partition is refined.
double lpml_partition_oracle(const Chain& chain, std::span<const CovariateField> fields,
                             const PointPattern& pattern, const QuadratureGrid& partition);

struct OracleRow {
  int n = 0;  // partition is n x n
  double oracle = 0.0;
  double lpml = 0.0;
  double abs_diff = 0.0;
};

/// lpml_partition_oracle() over a refinement schedule of n x n partitions,
/// each compared against lpml() computed on `lpml_grid`.
std::vector<OracleRow> oracle_convergence(const Chain& chain,
                                          std::span<const CovariateField> fields,
                                          const PointPattern& pattern,
                                          std::span<const int> schedule,
                                          const QuadratureGrid& lpml_grid);

}  // namespace nhpp

#endif  // NHPP_CRITERIA_HPP_
