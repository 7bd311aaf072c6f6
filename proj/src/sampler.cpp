#include "mcmcperf/sampler.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mcmcperf::sampler {

GaussianPrior GaussianPrior::isotropic(std::size_t k, double mu, double sigma) {
  GaussianPrior p{std::vector<double>(k, mu), std::vector<double>(k, sigma)};
  p.validate(k);
  return p;
}

void GaussianPrior::validate(std::size_t k) const {
  if (mu.size() != k || sigma.size() != k) {
    throw InputError("prior length does not match K = " + std::to_string(k));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(mu[i])) throw InputError("prior mean must be finite");
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) throw InputError("prior sigma must be positive");
  }
}

double GaussianPrior::log_density(std::span<const double> beta) const {
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double z = (beta[i] - mu[i]) / sigma[i];
    s += z * z;
  }
  return -0.5 * s;
}

void ChainConfig::validate() const {
  if (n_iter == 0) throw InputError("n_iter must be >= 1");
  if (n_burnin >= n_iter) throw InputError("n_burnin must be < n_iter");
  if (!(slice_width > 0.0) || !std::isfinite(slice_width)) throw InputError("slice_width must be positive");
  if (slice_max_steps == 0) throw InputError("slice_max_steps must be >= 1");
}

std::vector<double> ChainOutput::mean() const {
  std::vector<double> m(n_cols, 0.0);
  const std::size_t n = n_draws();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n_cols; ++k) m[k] += draws[i * n_cols + k];
  }
  for (double& v : m) v /= static_cast<double>(n ? n : 1);
  return m;
}

std::vector<double> ChainOutput::sd() const {
  const auto m = mean();
  std::vector<double> s(n_cols, 0.0);
  const std::size_t n = n_draws();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n_cols; ++k) {
      const double d = draws[i * n_cols + k] - m[k];
      s[k] += d * d;
    }
  }
  for (double& v : s) v = n > 1 ? std::sqrt(v / static_cast<double>(n - 1)) : 0.0;
  return s;
}

namespace {

// Prior term with coordinate k shifted; the other coordinates contribute
// their (constant) share so the value matches a full recompute.
double prior_shifted(const GaussianPrior& prior, std::span<const double> beta, std::size_t k,
                     double delta) {
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double b = i == k ? beta[i] + delta : beta[i];
    const double z = (b - prior.mu[i]) / prior.sigma[i];
    s += z * z;
  }
  return -0.5 * s;
}

}  // namespace

double log_posterior_coord(const glm::GlmWorkspace& ws, const glm::DesignMatrix& data,
                           const GaussianPrior& prior, std::size_t k, double delta,
                           const glm::ExecPlan& plan) {
  prior.validate(ws.n_cols());
  return glm::diff_loglike(ws, data, k, delta, plan) + prior_shifted(prior, ws.beta(), k, delta);
}

double log_posterior_full(const glm::DesignMatrix& data, std::span<const double> beta,
                          const GaussianPrior& prior, const glm::ExecPlan& plan) {
  prior.validate(data.n_cols());
  return glm::loglike(data, beta, plan) + prior.log_density(beta);
}

double slice_sample_coord(glm::GlmWorkspace& ws, const glm::DesignMatrix& data,
                          const GaussianPrior& prior, std::size_t k, rng::DeviateBuffer& u,
                          const ChainConfig& cfg, const glm::ExecPlan& plan,
                          std::uint64_t* evals) {
  if (k >= ws.n_cols()) throw InputError("coordinate index out of range");
  const double x0 = ws.beta()[k];
  std::vector<double> scratch;
  if (!cfg.use_diff_update) scratch.assign(ws.beta().begin(), ws.beta().end());

  std::uint64_t n_eval = 0;
  auto g = [&](double x) {
    ++n_eval;
    if (cfg.use_diff_update) return log_posterior_coord(ws, data, prior, k, x - x0, plan);
    scratch[k] = x;
    return log_posterior_full(data, scratch, prior, plan);
  };

  const double level = g(x0) + std::log(u.next());
  const double w = cfg.slice_width;
  double left = x0 - w * u.next();
  double right = left + w;
  std::size_t steps = 0;
  while (g(left) > level) {
    if (++steps > cfg.slice_max_steps) {
      throw SamplerError("slice sampler: stepping out exceeded " +
                         std::to_string(cfg.slice_max_steps) + " expansions at coordinate " +
                         std::to_string(k));
    }
    left -= w;
  }
  while (g(right) > level) {
    if (++steps > cfg.slice_max_steps) {
      throw SamplerError("slice sampler: stepping out exceeded " +
                         std::to_string(cfg.slice_max_steps) + " expansions at coordinate " +
                         std::to_string(k));
    }
    right += w;
  }

  double x1 = x0;
  for (std::size_t i = 0;; ++i) {
    if (i >= kShrinkMaxSteps) throw SamplerError("slice sampler: shrinkage did not terminate");
    x1 = left + u.next() * (right - left);
    if (g(x1) > level) break;
    if (x1 < x0) {
      left = x1;
    } else {
      right = x1;
    }
  }
  glm::commit_update(ws, k, x1 - x0, plan);
  if (evals) *evals += n_eval;
  return ws.beta()[k];
}

void gibbs_scan(glm::GlmWorkspace& ws, const glm::DesignMatrix& data, const GaussianPrior& prior,
                rng::DeviateBuffer& u, const ChainConfig& cfg, const glm::ExecPlan& plan,
                std::uint64_t* evals) {
  for (std::size_t k = 0; k < ws.n_cols(); ++k) {
    slice_sample_coord(ws, data, prior, k, u, cfg, plan, evals);
  }
}

ChainOutput run_chain(const glm::DesignMatrix& data, const GaussianPrior& prior,
                      const ChainConfig& cfg, const glm::ExecPlan& plan) {
  cfg.validate();
  glm::validate(plan);
  const std::size_t kk = data.n_cols();
  prior.validate(kk);

  const auto t0 = std::chrono::steady_clock::now();
  glm::GlmWorkspace ws(data, prior.mu);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, cfg.seed, cfg.stream);
  ChainOutput out;
  out.n_cols = kk;
  out.draws.reserve((cfg.n_iter - cfg.n_burnin) * kk);
  for (std::size_t it = 0; it < cfg.n_iter; ++it) {
    gibbs_scan(ws, data, prior, u, cfg, plan, &out.accept_evals);
#ifndef NDEBUG
    if ((it + 1) % 100 == 0 && ws.max_drift(data) > 1e-8) {
      throw std::logic_error("workspace drifted from X.beta");
    }
#endif
    if (it >= cfg.n_burnin) out.draws.insert(out.draws.end(), ws.beta().begin(), ws.beta().end());
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_draws_csv(std::ostream& out, const ChainOutput& chain) {
  for (std::size_t k = 0; k < chain.n_cols; ++k) out << (k ? "," : "") << k;
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < chain.n_draws(); ++i) {
    const auto d = chain.draw(i);
    for (std::size_t k = 0; k < d.size(); ++k) out << (k ? "," : "") << d[k];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace mcmcperf::sampler
