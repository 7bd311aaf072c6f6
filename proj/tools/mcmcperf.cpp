// mcmcperf: benchmark grids, GLM/HB sampling, Ising denoising and RNG
// benchmarks. Exit status: 0 ok, 2 bad usage or input, 1 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "mcmcperf/glm.hpp"
#include "mcmcperf/hb.hpp"
#include "mcmcperf/ising.hpp"
#include "mcmcperf/perf.hpp"
#include "mcmcperf/rng.hpp"
#include "mcmcperf/sampler.hpp"
#include "mcmcperf/simd/dispatch.hpp"

using namespace mcmcperf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

// Writes to a file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool is_stdout() const { return !file_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

bool parse_on_off(const std::string& v, const char* flag) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw InputError(std::string(flag) + " expects on or off");
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
  std::string config, n, k, strategies = "plf", workers = "1", chunks = "1", op = "loglike";
  std::size_t shards = 2, warmup = 3, reps = 5, evals = 5;
  std::uint64_t seed = 42;
  double clock_ghz = 2.6;
  std::string out = "-";
};

int cmd_bench(const BenchArgs& a) {
  perf::GridConfig cfg;
  if (a.config.empty() && a.k.empty()) throw InputError("bench: --K is required (or use --config)");
  if (a.config.empty() && a.n.empty()) throw InputError("bench: --N is required (or use --config)");
  if (!a.n.empty()) cfg.n_rows = perf::parse_count_list(a.n, "--N");
  if (!a.k.empty()) cfg.n_cols = perf::parse_count_list(a.k, "--K");
  cfg.strategies = perf::parse_strategy_list(a.strategies);
  cfg.workers = perf::parse_count_list(a.workers, "--workers");
  cfg.n_chunks = perf::parse_count_list(a.chunks, "--chunks");
  cfg.n_shards = a.shards;
  if (a.op == "loglike") cfg.op = perf::GridOp::Loglike;
  else if (a.op == "grad") cfg.op = perf::GridOp::Grad;
  else throw InputError("--op must be loglike or grad");
  cfg.warmup = a.warmup;
  cfg.reps = a.reps;
  cfg.evals_per_rep = a.evals;
  cfg.seed = a.seed;
  cfg.hw.cpu_clock_ghz = a.clock_ghz;
  if (!a.config.empty()) cfg = perf::read_grid_config_file(a.config, cfg);
  cfg.validate();

  const auto records = perf::run_grid(cfg);
  Output out(a.out);
  perf::write_bench_csv(out.stream(), records);
  if (!out.is_stdout()) {
    std::ofstream side(a.out + ".roofline.csv");
    if (!side) throw InputError("cannot write roofline sidecar");
    perf::write_roofline_csv(side, cfg.hw, cfg.n_cols);
  }
  std::size_t failed = 0;
  for (const auto& r : records) failed += !r.ok();
  if (failed) std::cerr << failed << " of " << records.size() << " cells failed\n";
  return kExitOk;
}

// --- glm-sample ------------------------------------------------------------------

struct GlmArgs {
  std::string data, synthetic, diff = "on", strategy = "plf", out = "draws.csv";
  std::size_t iters = 1000, burnin = 100, workers = 1, chunks = 1;
  std::uint64_t seed = 1;
  double prior_sd = 10.0, width = 1.0;
};

int cmd_glm_sample(const GlmArgs& a) {
  if (a.data.empty() == a.synthetic.empty()) throw InputError("glm-sample: give exactly one of --data or --synthetic");
  std::unique_ptr<glm::DesignMatrix> data;
  if (!a.data.empty()) {
    data = std::make_unique<glm::DesignMatrix>(glm::read_csv_file(a.data));
  } else {
    const auto nk = perf::parse_count_list(a.synthetic, "--synthetic");
    if (nk.size() != 2) throw InputError("--synthetic expects N,K");
    data = std::make_unique<glm::DesignMatrix>(glm::synthetic_glm(nk[0], nk[1], a.seed).data);
  }
  sampler::ChainConfig cfg;
  cfg.n_iter = a.iters;
  cfg.n_burnin = a.burnin;
  cfg.seed = a.seed;
  cfg.slice_width = a.width;
  cfg.use_diff_update = parse_on_off(a.diff, "--diff-update");
  const glm::ExecPlan plan{glm::parse_strategy(a.strategy), a.workers, a.chunks, 2};
  const auto prior = sampler::GaussianPrior::isotropic(data->n_cols(), 0.0, a.prior_sd);

  const auto chain = sampler::run_chain(*data, prior, cfg, plan);
  Output out(a.out);
  sampler::write_draws_csv(out.stream(), chain);
  if (!out.is_stdout()) {
    const auto m = chain.mean();
    std::printf("posterior_mean");
    for (double v : m) std::printf(" %.6f", v);
    std::printf("\ndraws %zu evals %llu wall_seconds %.3f\n", chain.n_draws(),
                static_cast<unsigned long long>(chain.accept_evals), chain.wall_time);
  }
  return kExitOk;
}

// --- hb-bench -------------------------------------------------------------------

struct HbArgs {
  std::size_t m = 20, k = 50, sweeps = 1, reps = 3;
  std::string navg = "1000,5000", neval = "1,10", modes = "coarse,fine", workers = "1";
  std::uint64_t seed = 42;
  double clock_ghz = 2.6;
  std::string out = "-";
};

int cmd_hb_bench(const HbArgs& a) {
  hb::HbBenchConfig cfg;
  cfg.m_groups = a.m;
  cfg.k = a.k;
  cfg.n_avg = perf::parse_count_list(a.navg, "--navg");
  cfg.neval = perf::parse_count_list(a.neval, "--neval");
  cfg.workers = perf::parse_count_list(a.workers, "--workers");
  cfg.modes.clear();
  std::stringstream ss(a.modes);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) cfg.modes.push_back(hb::parse_map_mode(item));
  }
  cfg.sweeps = a.sweeps;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.clock_ghz = a.clock_ghz;
  const auto records = hb::hb_benchmark(cfg);
  Output out(a.out);
  perf::write_bench_csv(out.stream(), records);
  return kExitOk;
}

// --- ising-denoise ------------------------------------------------------------------

struct IsingArgs {
  std::string in, out, trace, synthetic, diff = "off";
  double w = 1.0, bias = 2.0, noise = 0.1;
  std::size_t sweeps = 100, burnin = 20, workers = 1;
  std::uint64_t seed = 1;
  bool raw = false;
};

int cmd_ising_denoise(const IsingArgs& a) {
  if (a.in.empty() == a.synthetic.empty()) throw InputError("ising-denoise: give exactly one of --in or --synthetic");
  ising::BinaryImage clean, noisy;
  if (!a.in.empty()) {
    noisy = ising::read_pbm_file(a.in);
  } else {
    const auto hw = perf::parse_count_list(a.synthetic, "--synthetic");
    if (hw.size() != 2) throw InputError("--synthetic expects H,W");
    clean = ising::synthetic_image(hw[0], hw[1]);
    noisy = ising::add_flip_noise(clean, a.noise, a.seed);
  }
  ising::DenoiseConfig cfg;
  cfg.w = a.w;
  cfg.bias_scale = a.bias;
  cfg.sweeps = a.sweeps;
  cfg.burnin = a.burnin;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  cfg.diff_update = parse_on_off(a.diff, "--diff-update");
  const auto res = ising::denoise(noisy, cfg);
  ising::write_pbm_file(a.out, res.image, a.raw);
  if (!a.trace.empty()) {
    Output tr(a.trace);
    tr.stream() << "sweep,flip_rate\n";
    for (std::size_t i = 0; i < res.flip_rate.size(); ++i) tr.stream() << i << ',' << res.flip_rate[i] << '\n';
  }
  if (!a.synthetic.empty()) {
    std::printf("input_error %.6f restored_error %.6f\n", ising::error_rate(noisy, clean),
                ising::error_rate(res.image, clean));
  }
  return kExitOk;
}

// --- rng-bench --------------------------------------------------------------------

struct RngArgs {
  std::string dists = "uniform,normal,gamma,dirichlet", modes = "one-at-a-time,batch", out = "-";
  std::uint64_t n = 1000000, seed = 42;
  std::size_t capacity = rng::kDefaultCapacity;
  double clock_ghz = 2.6;
};

int cmd_rng_bench(const RngArgs& a) {
  rng::RngBenchConfig cfg;
  cfg.seed = a.seed;
  cfg.capacity = a.capacity;
  cfg.clock_ghz = a.clock_ghz;
  std::vector<rng::Dist> dists;
  std::vector<rng::GenMode> modes;
  std::stringstream ds(a.dists), ms(a.modes);
  for (std::string s; std::getline(ds, s, ',');) if (!s.empty()) dists.push_back(rng::parse_dist(s));
  for (std::string s; std::getline(ms, s, ',');) if (!s.empty()) modes.push_back(rng::parse_mode(s));
  if (dists.empty() || modes.empty()) throw InputError("rng-bench: empty --dist or --mode list");
  if (cfg.capacity == 0) throw InputError("--capacity must be >= 1");
  Output out(a.out);
  out.stream() << rng::rng_bench_csv_header() << '\n';
  for (auto d : dists) {
    for (auto m : modes) out.stream() << rng::to_csv_row(rng::rng_bench(d, m, a.n, cfg)) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel MCMC performance toolkit"};
  app.require_subcommand(1);
  std::string simd_level;
  app.add_option("--simd", simd_level, "Kernel table: scalar or avx2 (default: best available)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time log-likelihood evaluations over a strategy grid");
  bench->add_option("--config", ba.config, "key = value grid file; its keys override flags");
  bench->add_option("--N", ba.n, "Rows, comma-separated list");
  bench->add_option("--K", ba.k, "Columns, comma-separated list");
  bench->add_option("--strategies", ba.strategies, "som,mos,plf,plf-chunked,sharded")->capture_default_str();
  bench->add_option("--workers", ba.workers, "Worker counts")->capture_default_str();
  bench->add_option("--chunks", ba.chunks, "Chunks per worker block")->capture_default_str();
  bench->add_option("--shards", ba.shards, "Shards for the sharded strategy")->capture_default_str();
  bench->add_option("--op", ba.op, "loglike or grad")->capture_default_str();
  bench->add_option("--warmup", ba.warmup, "Untimed evaluations per cell")->capture_default_str();
  bench->add_option("--reps", ba.reps, "Timed repetitions per cell (median reported)")->capture_default_str();
  bench->add_option("--evals", ba.evals, "Evaluations per repetition")->capture_default_str();
  bench->add_option("--seed", ba.seed, "Data seed")->capture_default_str();
  bench->add_option("--clock-ghz", ba.clock_ghz, "Nominal clock for CPR")->capture_default_str();
  bench->add_option("--out", ba.out, "CSV path ('-' = stdout); also writes <out>.roofline.csv")->capture_default_str();

  GlmArgs ga;
  auto* glms = app.add_subcommand("glm-sample", "Slice-within-Gibbs sampling of a Bayesian logistic regression");
  glms->add_option("--data", ga.data, "CSV: K covariates then a 0/1 response per line");
  glms->add_option("--synthetic", ga.synthetic, "Generate N,K synthetic data instead");
  glms->add_option("--iters", ga.iters, "Iterations")->capture_default_str();
  glms->add_option("--burnin", ga.burnin, "Discarded iterations")->capture_default_str();
  glms->add_option("--seed", ga.seed, "Seed")->capture_default_str();
  glms->add_option("--diff-update", ga.diff, "on or off")->capture_default_str();
  glms->add_option("--strategy", ga.strategy, "Likelihood strategy")->capture_default_str();
  glms->add_option("--workers", ga.workers, "Workers per evaluation")->capture_default_str();
  glms->add_option("--chunks", ga.chunks, "Chunks per worker block")->capture_default_str();
  glms->add_option("--prior-sd", ga.prior_sd, "Prior standard deviation (mean 0)")->capture_default_str();
  glms->add_option("--slice-width", ga.width, "Initial slice width")->capture_default_str();
  glms->add_option("--out", ga.out, "Draws CSV ('-' = stdout, no summary)")->capture_default_str();

  HbArgs ha;
  auto* hbb = app.add_subcommand("hb-bench", "Coarse vs fine mapping grid for hierarchical regression");
  hbb->add_option("--M", ha.m, "Groups")->capture_default_str();
  hbb->add_option("--K", ha.k, "Coefficients per group")->capture_default_str();
  hbb->add_option("--navg", ha.navg, "Rows per group, list")->capture_default_str();
  hbb->add_option("--neval", ha.neval, "Scans per group per sweep, list")->capture_default_str();
  hbb->add_option("--modes", ha.modes, "coarse,fine")->capture_default_str();
  hbb->add_option("--workers", ha.workers, "Worker counts")->capture_default_str();
  hbb->add_option("--sweeps", ha.sweeps, "Timed sweeps per repetition")->capture_default_str();
  hbb->add_option("--reps", ha.reps, "Repetitions (median reported)")->capture_default_str();
  hbb->add_option("--seed", ha.seed, "Seed")->capture_default_str();
  hbb->add_option("--clock-ghz", ha.clock_ghz, "Nominal clock for CPR")->capture_default_str();
  hbb->add_option("--out", ha.out, "CSV path ('-' = stdout)")->capture_default_str();

  IsingArgs ia;
  auto* den = app.add_subcommand("ising-denoise", "Denoise a binary PBM image with an Ising prior");
  den->add_option("--in", ia.in, "Input PBM (P1 or P4)");
  den->add_option("--synthetic", ia.synthetic, "Use a noisy H,W synthetic disc instead of --in");
  den->add_option("--noise", ia.noise, "Flip rate for --synthetic")->capture_default_str();
  den->add_option("--out", ia.out, "Output PBM")->required();
  den->add_option("--w", ia.w, "Coupling")->capture_default_str();
  den->add_option("--bias", ia.bias, "Bias scale")->capture_default_str();
  den->add_option("--sweeps", ia.sweeps, "Gibbs sweeps")->capture_default_str();
  den->add_option("--burnin", ia.burnin, "Sweeps excluded from the mean")->capture_default_str();
  den->add_option("--seed", ia.seed, "Seed")->capture_default_str();
  den->add_option("--workers", ia.workers, "Workers per colour update")->capture_default_str();
  den->add_option("--diff-update", ia.diff, "on or off")->capture_default_str();
  den->add_option("--trace", ia.trace, "Per-sweep flip-rate CSV");
  den->add_flag("--raw", ia.raw, "Write P4 instead of P1");

  RngArgs ra;
  auto* rb = app.add_subcommand("rng-bench", "One-at-a-time vs batch random deviates");
  rb->add_option("--dist", ra.dists, "uniform,normal,gamma,dirichlet")->capture_default_str();
  rb->add_option("--mode", ra.modes, "one-at-a-time,batch")->capture_default_str();
  rb->add_option("--n", ra.n, "Samples per record (>= 100000)")->capture_default_str();
  rb->add_option("--seed", ra.seed, "Seed")->capture_default_str();
  rb->add_option("--capacity", ra.capacity, "Buffer capacity")->capture_default_str();
  rb->add_option("--clock-ghz", ra.clock_ghz, "Nominal clock for cycles")->capture_default_str();
  rb->add_option("--out", ra.out, "CSV path ('-' = stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!simd_level.empty()) {
      if (simd_level == "scalar") simd::select(simd::Level::Scalar);
      else if (simd_level == "avx2") simd::select(simd::Level::Avx2);
      else throw InputError("--simd must be scalar or avx2");
    }
    if (bench->parsed()) return cmd_bench(ba);
    if (glms->parsed()) return cmd_glm_sample(ga);
    if (hbb->parsed()) return cmd_hb_bench(ha);
    if (den->parsed()) return cmd_ising_denoise(ia);
    if (rb->parsed()) return cmd_rng_bench(ra);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
