#pragma once
// Roofline bounds, CPR bookkeeping and the benchmark grid runner.
//
// CPR (cycles per row) = clock * wall_seconds / (evals * n_rows), with the
// nominal clock from the HardwareDescriptor.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcmcperf/glm.hpp"

namespace mcmcperf::perf {

/// Defaults describe a dual-socket 2.6 GHz, 8-core, AVX (256-bit) machine
/// with four 8-byte DDR3-1600 channels per socket.
struct HardwareDescriptor {
  double cpu_clock_ghz = 2.6;
  std::size_t sockets = 2;
  std::size_t cores_per_socket = 8;
  std::size_t vector_bits = 256;
  std::size_t flops_per_lane_per_clock = 2;
  std::size_t mem_channels_per_socket = 4;
  std::size_t bytes_per_channel_per_mem_clock = 8;
  double mem_clock_ghz = 1.6;

  void validate() const;
};

/// 2K / (fma_factor * lanes * cores * sockets)
double compute_min_cpr(const HardwareDescriptor& hw, std::size_t k);
/// clock * 8 (K+1) / (bytes_per_channel * channels * sockets * mem_clock)
double memory_min_cpr(const HardwareDescriptor& hw, std::size_t k);

struct BenchRecord {
  std::string label;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::size_t workers = 0;
  std::size_t n_chunks = 0;
  double cpr = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t evals = 0;
  std::string status = "ok";  // "ok" or "failed: <reason>"

  bool ok() const { return status == "ok"; }
};

/// Fills cpr from wall_seconds, evals and n_rows.
BenchRecord make_record(std::string label, std::size_t n_rows, std::size_t n_cols,
                        std::size_t workers, std::size_t n_chunks, double wall_seconds,
                        std::uint64_t evals, double clock_ghz);

std::string bench_csv_header();
std::string to_csv_row(const BenchRecord& r);
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
/// Sidecar: "K,compute_min_cpr,memory_min_cpr" then one line per distinct K.
void write_roofline_csv(std::ostream& out, const HardwareDescriptor& hw,
                        const std::vector<std::size_t>& ks);

enum class GridOp { Loglike, Grad };

struct GridConfig {
  std::vector<glm::Strategy> strategies{glm::Strategy::Plf};
  std::vector<std::size_t> workers{1};
  std::vector<std::size_t> n_rows{10000};
  std::vector<std::size_t> n_cols{10};
  std::vector<std::size_t> n_chunks{1};
  std::size_t n_shards = 2;
  GridOp op = GridOp::Loglike;
  std::size_t warmup = 3;
  std::size_t reps = 5;
  std::size_t evals_per_rep = 5;
  std::uint64_t seed = 42;
  HardwareDescriptor hw;

  void validate() const;
};

/// key = value lines; '#' starts a comment. List keys take comma-separated
/// values: strategies, workers, N, K, chunks. Scalar keys: shards, op,
/// warmup, reps, evals, seed and the HardwareDescriptor field names.
/// Keys present in the text replace the corresponding fields of `base`.
GridConfig parse_grid_config(std::istream& in, GridConfig base = {});
GridConfig read_grid_config_file(const std::string& path, GridConfig base = {});

/// Comma-separated helpers shared with the CLI.
std::vector<std::size_t> parse_count_list(const std::string& text, const std::string& what);
std::vector<glm::Strategy> parse_strategy_list(const std::string& text);

/// Cells run sequentially in strategy-major order (strategy, workers, N, K,
/// chunks). Each cell: `warmup` untimed evaluations, then `reps` timed
/// repetitions of `evals_per_rep` evaluations; the median repetition is
/// reported. Beta changes on every evaluation. A failing cell yields a
/// record with status "failed: ..." and the grid continues.
std::vector<BenchRecord> run_grid(const GridConfig& cfg);

/// Mean wall time of one empty parallel region with `workers` workers.
double empty_region_seconds(std::size_t workers, std::size_t iterations = 1000);

}  // namespace mcmcperf::perf
