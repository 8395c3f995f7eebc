#include "nhpp/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nhpp/error.hpp"

namespace nhpp {

void PriorSpec::validate() const {
  if (!(sigma0_sq > 0.0) || !(a1 > 0.0) || !(b1 > 0.0)) {
    throw ConfigError("prior parameters sigma0_sq, a1 and b1 must be positive");
  }
}

McmcConfig McmcConfig::profile(std::string_view name) {
  McmcConfig c;
  if (name == "sim2018") {
    c.n_iter = 20000;
    c.burn_in = 10000;
    c.thin = 1;
  } else if (name == "paper51") {
    c.n_iter = 50000;
    c.burn_in = 30000;
    c.thin = 10;
  } else if (name == "paper52") {
    c.n_iter = 18000;
    c.burn_in = 10000;
    c.thin = 1;
  } else {
    throw ConfigError("unknown MCMC profile '" + std::string(name) +
                      "' (expected sim2018, paper51 or paper52)");
  }
  return c;
}

void McmcConfig::validate() const {
  if (burn_in < 0 || n_iter <= burn_in) {
    throw ConfigError("MCMC settings must satisfy n_iter > burn_in >= 0");
  }
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (proposal_sd.empty()) throw ConfigError("proposal_sd must not be empty");
  for (double sd : proposal_sd) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) {
      throw ConfigError("proposal_sd entries must be finite and non-negative");
    }
  }
}

std::vector<double> Chain::trace(std::size_t param) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& t : samples) out.push_back(param == 0 ? t.lambda0 : t.beta[param - 1]);
  return out;
}

std::vector<std::string> Chain::parameter_names() const {
  std::vector<std::string> names{"lambda0"};
  for (std::size_t j : spec.covariates()) names.push_back("beta_" + std::to_string(j + 1));
  return names;
}

GammaParams lambda0_full_conditional(const DesignCache& cache, std::span<const double> beta,
                                     const PriorSpec& prior) {
  return {prior.a1 + static_cast<double>(cache.num_events()),
          prior.b1 + cache.integral_factor(beta)};
}

GammaParams lambda0_full_conditional(const ModelSpec& spec,
                                     std::span<const CovariateField> fields,
                                     const PointPattern& pattern, const QuadratureGrid& grid,
                                     std::span<const double> beta, const PriorSpec& prior) {
  if (beta.size() != spec.dim()) throw ConfigError("beta does not match the model");
  const DesignCache cache(spec, fields, pattern, grid);
  return lambda0_full_conditional(cache, beta, prior);
}

namespace {

class Sampler {
 public:
  Sampler(const DesignCache& cache, const PriorSpec& prior, const McmcConfig& config)
      : cache_(cache),
        prior_(prior),
        config_(config),
        dim_(cache.dim()),
        m_(cache.num_unique_rows()),
        rng_(config.seed),
        eta_(m_, 0.0),
        proposal_eta_(m_, 0.0) {
    beta_ = config.initial_beta.empty() ? std::vector<double>(dim_, 0.0) : config.initial_beta;
    if (beta_.size() != dim_) throw ConfigError("initial_beta does not match the model");
    if (config.proposal_sd.size() == 1) {
      sd_.assign(dim_, config.proposal_sd[0]);
    } else if (config.proposal_sd.size() == dim_) {
      sd_ = config.proposal_sd;
    } else {
      throw ConfigError("proposal_sd must have 1 or " + std::to_string(dim_) + " entries");
    }
    const double k = static_cast<double>(cache.num_events());
    lambda0_ = k > 0 ? k / cache.area() : prior.a1 / prior.b1;
    cache_.quad_eta(beta_, eta_);
    integral_ = dim_ == 0 ? cache.area() : cache_.integral_from_eta(eta_);

    try {
      const double ll = cache_.log_likelihood(Theta{lambda0_, beta_});
      if (!std::isfinite(ll)) throw NumericError("non-finite log-likelihood");
    } catch (const NumericError& e) {
      throw InitializationError(std::string("cannot start the sampler: ") + e.what());
    }
    if (!std::isfinite(integral_)) {
      throw InitializationError("cannot start the sampler: intensity integral is not finite");
    }
  }

  Chain run(const ModelSpec& spec) {
    Chain chain;
    chain.spec = spec;
    const int kept = config_.expected_kept();
    chain.samples.reserve(static_cast<std::size_t>(kept));
    chain.iterations.reserve(static_cast<std::size_t>(kept));
    chain.kernel_sd.reserve(static_cast<std::size_t>(kept) * dim_);

    const std::size_t slots = config_.joint ? std::min<std::size_t>(dim_, 1) : dim_;
    std::vector<double> accepted_burn(slots, 0.0);
    std::vector<double> accepted_main(slots, 0.0);
    std::vector<bool> moved(slots, false);

    for (int t = 0; t < config_.n_iter; ++t) {
      update_lambda0();
      if (config_.joint) {
        if (dim_ > 0) moved[0] = update_joint();
      } else {
        for (std::size_t j = 0; j < dim_; ++j) moved[j] = update_component(j);
      }

      const bool burning = t < config_.burn_in;
      for (std::size_t s = 0; s < slots; ++s) {
        (burning ? accepted_burn : accepted_main)[s] += moved[s] ? 1.0 : 0.0;
      }
      if (burning && config_.adapt) adapt(t, moved);

      if (!burning && (t - config_.burn_in + 1) % config_.thin == 0) {
        chain.samples.push_back(Theta{lambda0_, beta_});
        chain.iterations.push_back(t + 1);
        chain.kernel_sd.insert(chain.kernel_sd.end(), sd_.begin(), sd_.end());
      }
    }

    const double n_main = config_.n_iter - config_.burn_in;
    const double n_burn = config_.burn_in;
    for (std::size_t j = 0; j < dim_; ++j) {
      const std::size_t s = config_.joint ? 0 : j;
      chain.acceptance_rate_beta.push_back(accepted_main[s] / n_main);
      chain.burn_in_acceptance_beta.push_back(n_burn > 0 ? accepted_burn[s] / n_burn : 0.0);
      if (n_burn > 0 && sd_[j] > 0.0) {
        const double r = chain.burn_in_acceptance_beta.back();
        if (r == 0.0 || r == 1.0) {
          chain.warnings.push_back("beta component " + std::to_string(j + 1) +
                                   " had burn-in acceptance rate " + (r == 0.0 ? "0" : "1") +
                                   "; proposal scale needs tuning");
        }
      }
    }
    return chain;
  }

 private:
  void update_lambda0() {
    const double shape = prior_.a1 + static_cast<double>(cache_.num_events());
    const double rate = prior_.b1 + integral_;
    std::gamma_distribution<double> gamma(shape, 1.0 / rate);
    lambda0_ = gamma(rng_);
    // Guard against an exact zero draw when the shape is tiny.
    if (!(lambda0_ > 0.0)) lambda0_ = std::numeric_limits<double>::min();
  }

  // log N(0, sigma0_sq) density up to a constant.
  double log_prior_beta(double b) const { return -0.5 * b * b / prior_.sigma0_sq; }

  bool accept(double log_ratio) {
    if (!std::isfinite(log_ratio)) return false;
    if (log_ratio >= 0.0) return true;
    return std::log(unit_(rng_)) < log_ratio;
  }

  bool update_component(std::size_t j) {
    if (sd_[j] == 0.0) return false;
    const double delta = sd_[j] * normal_(rng_);
    const auto rows = cache_.quad_rows();
    for (std::size_t u = 0; u < m_; ++u) proposal_eta_[u] = eta_[u] + delta * rows[u * dim_ + j];
    const double proposal_integral = cache_.integral_from_eta(proposal_eta_);
    const double b = beta_[j];
    const double log_ratio = delta * cache_.event_sum()[j] -
                             lambda0_ * (proposal_integral - integral_) +
                             log_prior_beta(b + delta) - log_prior_beta(b);
    if (!accept(log_ratio)) return false;
    beta_[j] = b + delta;
    eta_.swap(proposal_eta_);
    integral_ = proposal_integral;
    return true;
  }

  bool update_joint() {
    std::vector<double> delta(dim_);
    bool any = false;
    for (std::size_t j = 0; j < dim_; ++j) {
      delta[j] = sd_[j] == 0.0 ? 0.0 : sd_[j] * normal_(rng_);
      any = any || sd_[j] != 0.0;
    }
    if (!any) return false;
    const auto rows = cache_.quad_rows();
    std::copy(eta_.begin(), eta_.end(), proposal_eta_.begin());
    for (std::size_t j = 0; j < dim_; ++j) {
      if (delta[j] == 0.0) continue;
      for (std::size_t u = 0; u < m_; ++u) proposal_eta_[u] += delta[j] * rows[u * dim_ + j];
    }
    const double proposal_integral = cache_.integral_from_eta(proposal_eta_);
    double log_ratio = -lambda0_ * (proposal_integral - integral_);
    for (std::size_t j = 0; j < dim_; ++j) {
      log_ratio += delta[j] * cache_.event_sum()[j] + log_prior_beta(beta_[j] + delta[j]) -
                   log_prior_beta(beta_[j]);
    }
    if (!accept(log_ratio)) return false;
    for (std::size_t j = 0; j < dim_; ++j) beta_[j] += delta[j];
    eta_.swap(proposal_eta_);
    integral_ = proposal_integral;
    return true;
  }

  void adapt(int t, const std::vector<bool>& moved) {
    const double gain = std::pow(t + 1.0, -0.6);
    if (config_.joint) {
      if (dim_ == 0) return;
      const double step = gain * ((moved[0] ? 1.0 : 0.0) - 0.25);
      for (double& sd : sd_) {
        if (sd > 0.0) sd *= std::exp(step);
      }
      return;
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      if (sd_[j] > 0.0) sd_[j] *= std::exp(gain * ((moved[j] ? 1.0 : 0.0) - 0.44));
    }
  }

  const DesignCache& cache_;
  const PriorSpec& prior_;
  const McmcConfig& config_;
  std::size_t dim_;
  std::size_t m_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<double> beta_;
  std::vector<double> sd_;
  std::vector<double> eta_;
  std::vector<double> proposal_eta_;
  double lambda0_ = 1.0;
  double integral_ = 1.0;
};

}  // namespace

Chain sample_posterior(const DesignCache& cache, const ModelSpec& spec, const PriorSpec& prior,
                       const McmcConfig& config) {
  prior.validate();
  config.validate();
  if (cache.dim() != spec.dim()) throw ConfigError("design cache does not match the model");
  Sampler sampler(cache, prior, config);
  return sampler.run(spec);
}

Chain sample_posterior(const PointPattern& pattern, const ModelSpec& spec,
                       std::span<const CovariateField> fields, const PriorSpec& prior,
                       const McmcConfig& config, const QuadratureGrid& grid) {
  const DesignCache cache(spec, fields, pattern, grid);
  return sample_posterior(cache, spec, prior, config);
}

std::pair<double, double> hpd_interval(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("HPD level must lie in (0, 1)");
  if (samples.empty()) throw ConfigError("HPD interval of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // The epsilon keeps e.g. 0.95 * 100 from rounding up to 96.
  auto m = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
  m = std::clamp<std::size_t>(m, 1, n);
  std::size_t best = 0;
  double best_width = sorted[m - 1] - sorted[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double w = sorted[i + m - 1] - sorted[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {sorted[best], sorted[best + m - 1]};
}

double effective_sample_size(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (samples[i] - mean) * (samples[i + lag] - mean);
    return s / n;
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) return static_cast<double>(n);
  double tau = -gamma0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    double pair = autocov(lag) + autocov(lag + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);  // initial monotone sequence
    previous = pair;
    tau += 2.0 * pair;
  }
  return n * gamma0 / tau;
}

PosteriorSummary posterior_summary(const Chain& chain, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("HPD level must lie in (0, 1)");
  if (chain.n_kept() < 10) throw ConfigError("posterior summary needs at least 10 samples");
  PosteriorSummary out;
  out.level = level;
  const auto names = chain.parameter_names();
  for (std::size_t p = 0; p < names.size(); ++p) {
    const auto x = chain.trace(p);
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const auto [lo, hi] = hpd_interval(x, level);
    out.parameters.push_back({names[p], mean, std::sqrt(ss / (n - 1.0)), lo, hi,
                              effective_sample_size(x)});
  }
  return out;
}

}  // namespace nhpp
