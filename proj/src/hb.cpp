#include "mcmcperf/hb.hpp"

#include <algorithm>
#include <chrono>

#include "mcmcperf/parallel.hpp"

namespace mcmcperf::hb {

void HbDataset::validate() const {
  if (groups.empty()) throw InputError("HB dataset needs at least one group");
  for (const auto& g : groups) {
    if (g.n_cols() != n_cols()) throw InputError("all HB groups must share K");
  }
}

SyntheticHb synthetic_hb(std::size_t m_groups, std::size_t k, std::size_t n_avg, std::uint64_t seed,
                         const sampler::GaussianPrior& prior) {
  if (m_groups == 0 || k == 0 || n_avg == 0) throw InputError("synthetic_hb: M, K and Navg must be >= 1");
  prior.validate(k);
  rng::DeviateBuffer z(rng::DeviateKind::StdNormal, seed, rng::derive_stream(seed, 0xb7a));
  SyntheticHb out;
  for (std::size_t m = 0; m < m_groups; ++m) {
    std::vector<double> beta(k);
    for (std::size_t j = 0; j < k; ++j) beta[j] = prior.mu[j] + prior.sigma[j] * z.next();
    auto g = glm::synthetic_glm(n_avg, beta, rng::derive_stream(seed, m + 1));
    out.data.groups.push_back(std::move(g.data));
    out.beta_true.push_back(std::move(beta));
  }
  return out;
}

SyntheticHb synthetic_hb(std::size_t m_groups, std::size_t k, std::size_t n_avg, std::uint64_t seed) {
  return synthetic_hb(m_groups, k, n_avg, seed, sampler::GaussianPrior::isotropic(k));
}

std::string_view to_string(MapMode m) { return m == MapMode::Coarse ? "coarse" : "fine"; }

MapMode parse_map_mode(std::string_view s) {
  if (s == "coarse") return MapMode::Coarse;
  if (s == "fine") return MapMode::Fine;
  throw InputError("unknown mapping mode '" + std::string(s) + "'");
}

void MappingPolicy::validate() const {
  if (workers == 0 || workers > kMaxWorkers) {
    throw InputError("workers must be in [1, " + std::to_string(kMaxWorkers) + "]");
  }
  if (neval == 0) throw InputError("neval must be >= 1");
}

HbChain::HbChain(const HbDataset& data, sampler::GaussianPrior prior, std::uint64_t seed,
                 sampler::ChainConfig slice)
    : data_(&data), prior_(std::move(prior)), slice_(slice) {
  data.validate();
  prior_.validate(data.n_cols());
  slice_.use_diff_update = true;
  states_.reserve(data.m_groups());
  for (std::size_t m = 0; m < data.m_groups(); ++m) {
    states_.push_back(Group{glm::GlmWorkspace(data.groups[m], prior_.mu),
                            rng::DeviateBuffer(rng::DeviateKind::Uniform01, seed, rng::derive_stream(seed, m)),
                            0});
  }
}

void HbChain::update_group(std::size_t m, std::size_t neval, const glm::ExecPlan& plan) {
  auto& g = states_[m];
  for (std::size_t r = 0; r < neval; ++r) {
    sampler::gibbs_scan(g.ws, data_->groups[m], prior_, g.u, slice_, plan, &g.evals);
  }
}

void HbChain::sweep(const MappingPolicy& policy) {
  policy.validate();
  const std::size_t m_count = states_.size();
  if (policy.mode == MapMode::Coarse) {
    // Static round-robin: worker w owns groups w, w + W, w + 2W, ...
    const glm::ExecPlan inner{glm::Strategy::Plf, 1, 1, 1};
    const std::size_t w = std::min(policy.workers, m_count);
    parallel_region(w, [&](std::size_t id) {
      for (std::size_t m = id; m < m_count; m += w) update_group(m, policy.neval, inner);
    });
  } else {
    const glm::ExecPlan inner{glm::Strategy::Plf, policy.workers, 1, 1};
    for (std::size_t m = 0; m < m_count; ++m) update_group(m, policy.neval, inner);
  }
}

std::vector<std::vector<double>> HbChain::betas() const {
  std::vector<std::vector<double>> out;
  for (const auto& g : states_) out.emplace_back(g.ws.beta().begin(), g.ws.beta().end());
  return out;
}

std::uint64_t HbChain::evals() const {
  std::uint64_t s = 0;
  for (const auto& g : states_) s += g.evals;
  return s;
}

void hb_sweep(const HbDataset& data, std::vector<std::vector<double>>& betas,
              const sampler::GaussianPrior& prior, const MappingPolicy& policy, std::uint64_t seed) {
  data.validate();
  policy.validate();
  prior.validate(data.n_cols());
  if (betas.size() != data.m_groups()) throw InputError("need one coefficient vector per group");
  const std::size_t m_count = data.m_groups();
  sampler::ChainConfig slice;

  auto update = [&](std::size_t m, const glm::ExecPlan& plan) {
    glm::GlmWorkspace ws(data.groups[m], betas[m]);
    rng::DeviateBuffer u(rng::DeviateKind::Uniform01, seed, rng::derive_stream(seed, m));
    for (std::size_t r = 0; r < policy.neval; ++r) sampler::gibbs_scan(ws, data.groups[m], prior, u, slice, plan);
    betas[m].assign(ws.beta().begin(), ws.beta().end());
  };
  if (policy.mode == MapMode::Coarse) {
    const glm::ExecPlan inner{glm::Strategy::Plf, 1, 1, 1};
    const std::size_t w = std::min(policy.workers, m_count);
    parallel_region(w, [&](std::size_t id) {
      for (std::size_t m = id; m < m_count; m += w) update(m, inner);
    });
  } else {
    const glm::ExecPlan inner{glm::Strategy::Plf, policy.workers, 1, 1};
    for (std::size_t m = 0; m < m_count; ++m) update(m, inner);
  }
}

std::vector<perf::BenchRecord> hb_benchmark(const HbBenchConfig& cfg) {
  if (cfg.m_groups == 0 || cfg.k == 0 || cfg.reps == 0 || cfg.sweeps == 0) {
    throw InputError("hb_benchmark: M, K, reps and sweeps must be >= 1");
  }
  if (cfg.n_avg.empty() || cfg.neval.empty() || cfg.modes.empty() || cfg.workers.empty()) {
    throw InputError("hb_benchmark: every grid axis needs at least one value");
  }
  std::vector<perf::BenchRecord> out;
  const auto prior = sampler::GaussianPrior::isotropic(cfg.k);
  for (auto n_avg : cfg.n_avg) {
    const auto syn = synthetic_hb(cfg.m_groups, cfg.k, n_avg, cfg.seed, prior);
    for (auto mode : cfg.modes) {
      for (auto workers : cfg.workers) {
        for (auto neval : cfg.neval) {
          const std::string label = std::string(to_string(mode)) + "-neval" + std::to_string(neval);
          try {
            const MappingPolicy policy{mode, workers, neval};
            policy.validate();
            std::vector<double> walls;
            std::vector<std::uint64_t> evals;
            for (std::size_t r = 0; r < cfg.reps; ++r) {
              HbChain chain(syn.data, prior, cfg.seed);
              const auto t0 = std::chrono::steady_clock::now();
              for (std::size_t s = 0; s < cfg.sweeps; ++s) chain.sweep(policy);
              walls.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
              evals.push_back(chain.evals());
            }
            std::vector<std::size_t> order(walls.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return walls[a] < walls[b]; });
            const std::size_t mid = order[order.size() / 2];
            out.push_back(perf::make_record(label, n_avg, cfg.k, workers, 1, walls[mid], evals[mid], cfg.clock_ghz));
          } catch (const std::exception& ex) {
            out.push_back(perf::BenchRecord{label, n_avg, cfg.k, workers, 1, 0.0, 0.0, 0,
                                            std::string("failed: ") + ex.what()});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mcmcperf::hb
