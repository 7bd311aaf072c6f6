#pragma once
// Slice-within-Gibbs sampler for Bayesian logistic regression with a diagonal
// Gaussian prior. Each coordinate update is a univariate slice sample
// (stepping out, then shrinkage) whose target evaluations go through the
// differential-update path unless the chain is told to recompute in full.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcmcperf/glm.hpp"
#include "mcmcperf/rng.hpp"

namespace mcmcperf::sampler {

struct GaussianPrior {
  std::vector<double> mu;
  std::vector<double> sigma;  // per-coordinate standard deviations

  static GaussianPrior isotropic(std::size_t k, double mu = 0.0, double sigma = 1.0);
  /// Throws InputError on length mismatch or non-positive sigma.
  void validate(std::size_t k) const;
  /// -1/2 sum ((beta_k - mu_k) / sigma_k)^2
  double log_density(std::span<const double> beta) const;
};

struct ChainConfig {
  std::size_t n_iter = 1000;
  std::size_t n_burnin = 0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // Philox stream id of the chain's uniform deviates
  double slice_width = 1.0;
  std::size_t slice_max_steps = 50;
  bool use_diff_update = true;

  void validate() const;
};

struct ChainOutput {
  std::size_t n_cols = 0;
  std::vector<double> draws;  // row-major, (n_iter - n_burnin) x K
  std::uint64_t accept_evals = 0;
  double wall_time = 0.0;

  std::size_t n_draws() const { return n_cols ? draws.size() / n_cols : 0; }
  std::span<const double> draw(std::size_t i) const {
    return std::span<const double>(draws).subspan(i * n_cols, n_cols);
  }
  std::vector<double> mean() const;
  std::vector<double> sd() const;
};

inline constexpr std::size_t kShrinkMaxSteps = 10000;

/// Log posterior at beta_current with coordinate k moved by delta, up to an
/// additive constant. The likelihood part uses diff_loglike.
double log_posterior_coord(const glm::GlmWorkspace& ws, const glm::DesignMatrix& data,
                           const GaussianPrior& prior, std::size_t k, double delta,
                           const glm::ExecPlan& plan = {});

/// Same quantity by full recomputation of X.beta.
double log_posterior_full(const glm::DesignMatrix& data, std::span<const double> beta,
                          const GaussianPrior& prior, const glm::ExecPlan& plan = {});

/// Draws a new beta_k from its conditional posterior, commits it to the
/// workspace and returns it. `evals` (if given) is incremented once per
/// target evaluation. Throws SamplerError if stepping out exceeds
/// cfg.slice_max_steps expansions.
double slice_sample_coord(glm::GlmWorkspace& ws, const glm::DesignMatrix& data,
                          const GaussianPrior& prior, std::size_t k, rng::DeviateBuffer& u,
                          const ChainConfig& cfg, const glm::ExecPlan& plan = {},
                          std::uint64_t* evals = nullptr);

/// One systematic scan k = 0 .. K-1.
void gibbs_scan(glm::GlmWorkspace& ws, const glm::DesignMatrix& data, const GaussianPrior& prior,
                rng::DeviateBuffer& u, const ChainConfig& cfg, const glm::ExecPlan& plan = {},
                std::uint64_t* evals = nullptr);

/// Starts at beta = prior.mu.
ChainOutput run_chain(const glm::DesignMatrix& data, const GaussianPrior& prior,
                      const ChainConfig& cfg, const glm::ExecPlan& plan = {});

/// Header row "0,1,...,K-1", then one row per retained draw.
void write_draws_csv(std::ostream& out, const ChainOutput& chain);

}  // namespace mcmcperf::sampler
