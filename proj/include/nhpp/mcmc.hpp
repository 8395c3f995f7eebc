#ifndef NHPP_MCMC_HPP_
#define NHPP_MCMC_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nhpp/likelihood.hpp"

namespace nhpp {

/// beta_j ~ N(0, sigma0_sq) independently, lambda0 ~ Gamma(a1, b1) in
/// shape-rate form (mean a1 / b1).
struct PriorSpec {
  double sigma0_sq = 100.0;
  double a1 = 0.01;
  double b1 = 0.01;

  /// N(0, 10^2) on beta and Gamma(1, 1) on lambda0.
  static PriorSpec simulation() { return {100.0, 1.0, 1.0}; }
  void validate() const;
};

struct McmcConfig {
  int n_iter = 20000;
  int burn_in = 10000;
  int thin = 1;
  /// Random-walk scale for beta: one value shared by every component, or one
  /// per component. A zero entry holds that component fixed.
  std::vector<double> proposal_sd{0.1};
  bool adapt = true;
  /// Joint Gaussian proposal for all of beta instead of one component at a time.
  bool joint = false;
  std::uint64_t seed = 1;
  /// Starting beta; empty means all zeros.
  std::vector<double> initial_beta;

  /// Named chain-length presets: "sim2018" (20000 iterations, 10000 burn-in),
  /// "paper51" (30000 burn-in, thin 10, 2000 kept) and "paper52" (10000
  /// burn-in, 8000 kept).
  static McmcConfig profile(std::string_view name);
  void validate() const;
  int expected_kept() const { return (n_iter - burn_in) / thin; }
};

struct Chain {
  ModelSpec spec;
  std::vector<Theta> samples;
  /// 1-based iteration number of each kept sample.
  std::vector<int> iterations;
  /// Post-burn-in acceptance rate of each beta component (joint mode repeats
  /// the joint rate).
  std::vector<double> acceptance_rate_beta;
  std::vector<double> burn_in_acceptance_beta;
  /// Proposal scale in force at each kept iteration, n_kept x dim row-major.
  std::vector<double> kernel_sd;
  std::vector<std::string> warnings;

  std::size_t n_kept() const { return samples.size(); }
  std::size_t dim() const { return spec.dim(); }
  /// Values of one parameter across the chain; index 0 is lambda0, index
  /// j + 1 is beta_j.
  std::vector<double> trace(std::size_t param) const;
  std::vector<std::string> parameter_names() const;
};

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

/// Exact full conditional of lambda0 given beta: Gamma(a1 + k, b1 + C(beta)).
GammaParams lambda0_full_conditional(const DesignCache& cache, std::span<const double> beta,
                                     const PriorSpec& prior);
GammaParams lambda0_full_conditional(const ModelSpec& spec,
                                     std::span<const CovariateField> fields,
                                     const PointPattern& pattern, const QuadratureGrid& grid,
                                     std::span<const double> beta, const PriorSpec& prior);

/// Metropolis-Hastings within Gibbs: a conjugate Gibbs draw of lambda0
/// followed by Gaussian random-walk updates of beta. During burn-in the
/// proposal scales adapt toward a target acceptance rate (0.44 componentwise,
/// 0.25 joint) by Robbins-Monro steps on log sd; afterwards they are frozen.
/// Deterministic given config.seed.
Chain sample_posterior(const DesignCache& cache, const ModelSpec& spec, const PriorSpec& prior,
                       const McmcConfig& config);
Chain sample_posterior(const PointPattern& pattern, const ModelSpec& spec,
                       std::span<const CovariateField> fields, const PriorSpec& prior,
                       const McmcConfig& config, const QuadratureGrid& grid);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double hpd_lower = 0.0;
  double hpd_upper = 0.0;
  double ess = 0.0;
};

struct PosteriorSummary {
  double level = 0.95;
  std::vector<ParameterSummary> parameters;  // lambda0 first, then beta
};

/// Narrowest window of ceil(level * n) consecutive order statistics; ties go
/// to the lowest starting index.
std::pair<double, double> hpd_interval(std::span<const double> samples, double level);

/// Effective sample size from the initial positive sequence of
/// autocorrelations.
double effective_sample_size(std::span<const double> samples);

/// Requires n_kept >= 10 and level in (0, 1).
PosteriorSummary posterior_summary(const Chain& chain, double level = 0.95);

}  // namespace nhpp

#endif  // NHPP_MCMC_HPP_
