#pragma once
// Hierarchical logistic regression over M groups with a fixed Gaussian
// hyperprior. Given the hyperprior the groups are conditionally independent,
// so they can be updated in parallel (coarse mapping) or one after another
// with a row-parallel likelihood (fine mapping).

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mcmcperf/glm.hpp"
#include "mcmcperf/perf.hpp"
#include "mcmcperf/rng.hpp"
#include "mcmcperf/sampler.hpp"

namespace mcmcperf::hb {

struct HbDataset {
  std::vector<glm::DesignMatrix> groups;

  std::size_t m_groups() const { return groups.size(); }
  std::size_t n_cols() const { return groups.empty() ? 0 : groups.front().n_cols(); }
  void validate() const;
};

struct SyntheticHb {
  HbDataset data;
  std::vector<std::vector<double>> beta_true;  // one per group
};

/// beta_m ~ N(prior.mu, prior.sigma^2) per group; every group has n_avg rows
/// generated as in glm::synthetic_glm.
SyntheticHb synthetic_hb(std::size_t m_groups, std::size_t k, std::size_t n_avg, std::uint64_t seed,
                         const sampler::GaussianPrior& prior);
SyntheticHb synthetic_hb(std::size_t m_groups, std::size_t k, std::size_t n_avg, std::uint64_t seed);

enum class MapMode { Coarse, Fine };

std::string_view to_string(MapMode m);
MapMode parse_map_mode(std::string_view s);

struct MappingPolicy {
  MapMode mode = MapMode::Fine;
  std::size_t workers = 1;
  std::size_t neval = 1;  // coordinate scans per group per sweep

  void validate() const;
};

/// Per-group sampler state. Group m draws its uniforms from Philox stream
/// derive_stream(seed, m), so the schedule cannot change any draw.
class HbChain {
 public:
  HbChain(const HbDataset& data, sampler::GaussianPrior prior, std::uint64_t seed,
          sampler::ChainConfig slice = {});

  /// Updates every group once: policy.neval full coordinate scans each.
  void sweep(const MappingPolicy& policy);

  std::size_t m_groups() const { return states_.size(); }
  std::span<const double> beta(std::size_t m) const { return states_[m].ws.beta(); }
  std::vector<std::vector<double>> betas() const;
  /// Total target evaluations so far over all groups.
  std::uint64_t evals() const;
  const sampler::ChainConfig& slice_config() const { return slice_; }

 private:
  struct Group {
    glm::GlmWorkspace ws;
    rng::DeviateBuffer u;
    std::uint64_t evals = 0;
  };

  void update_group(std::size_t m, std::size_t neval, const glm::ExecPlan& plan);

  const HbDataset* data_;
  sampler::GaussianPrior prior_;
  sampler::ChainConfig slice_;
  std::vector<Group> states_;
};

/// Functional form: updates `betas` (one vector per group) in place, using
/// fresh per-group streams derive_stream(seed, m).
void hb_sweep(const HbDataset& data, std::vector<std::vector<double>>& betas,
              const sampler::GaussianPrior& prior, const MappingPolicy& policy, std::uint64_t seed);

struct HbBenchConfig {
  std::size_t m_groups = 20;
  std::size_t k = 50;
  std::vector<std::size_t> n_avg{1000, 5000};
  std::vector<std::size_t> neval{1, 10};
  std::vector<MapMode> modes{MapMode::Coarse, MapMode::Fine};
  std::vector<std::size_t> workers{1};
  std::size_t sweeps = 1;  // timed sweeps per repetition
  std::size_t reps = 3;
  std::uint64_t seed = 42;
  double clock_ghz = 2.6;
};

/// One record per (mode, workers, n_avg, neval) cell, label "<mode>-neval<n>".
/// n_rows is n_avg; evals counts posterior evaluations summed over groups,
/// so cpr is cycles per group row per evaluation. Median over reps.
std::vector<perf::BenchRecord> hb_benchmark(const HbBenchConfig& cfg);

}  // namespace mcmcperf::hb
