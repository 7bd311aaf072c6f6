#include "mcmcperf/perf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "mcmcperf/parallel.hpp"
#include "mcmcperf/rng.hpp"

namespace mcmcperf::perf {

using Clock = std::chrono::steady_clock;

void HardwareDescriptor::validate() const {
  if (!(cpu_clock_ghz > 0.0) || !(mem_clock_ghz > 0.0) || sockets == 0 || cores_per_socket == 0 ||
      vector_bits < 64 || flops_per_lane_per_clock == 0 || mem_channels_per_socket == 0 ||
      bytes_per_channel_per_mem_clock == 0) {
    throw InputError("hardware descriptor fields must all be positive (vector_bits >= 64)");
  }
}

double compute_min_cpr(const HardwareDescriptor& hw, std::size_t k) {
  hw.validate();
  if (k == 0) throw InputError("K must be >= 1");
  const double lanes = static_cast<double>(hw.vector_bits) / 64.0;
  return 2.0 * static_cast<double>(k) /
         (static_cast<double>(hw.flops_per_lane_per_clock) * lanes *
          static_cast<double>(hw.cores_per_socket * hw.sockets));
}

double memory_min_cpr(const HardwareDescriptor& hw, std::size_t k) {
  hw.validate();
  if (k == 0) throw InputError("K must be >= 1");
  const double bytes_per_mem_clock = static_cast<double>(
      hw.bytes_per_channel_per_mem_clock * hw.mem_channels_per_socket * hw.sockets);
  return hw.cpu_clock_ghz * 8.0 * static_cast<double>(k + 1) / (bytes_per_mem_clock * hw.mem_clock_ghz);
}

BenchRecord make_record(std::string label, std::size_t n_rows, std::size_t n_cols,
                        std::size_t workers, std::size_t n_chunks, double wall_seconds,
                        std::uint64_t evals, double clock_ghz) {
  BenchRecord r{std::move(label), n_rows, n_cols, workers, n_chunks, 0.0, wall_seconds, evals, "ok"};
  if (evals > 0 && n_rows > 0) {
    r.cpr = clock_ghz * 1e9 * wall_seconds / (static_cast<double>(evals) * static_cast<double>(n_rows));
  }
  return r;
}

std::string bench_csv_header() {
  return "label,n_rows,n_cols,workers,n_chunks,cpr,wall_seconds,evals,status";
}

std::string to_csv_row(const BenchRecord& r) {
  std::string status = r.status;
  std::replace(status.begin(), status.end(), ',', ';');
  std::replace(status.begin(), status.end(), '\n', ' ');
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.6g,%.6g,%llu,", r.n_rows, r.n_cols, r.workers,
                r.n_chunks, r.cpr, r.wall_seconds, static_cast<unsigned long long>(r.evals));
  return r.label + "," + buf + status;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << bench_csv_header() << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

void write_roofline_csv(std::ostream& out, const HardwareDescriptor& hw,
                        const std::vector<std::size_t>& ks) {
  out << "K,compute_min_cpr,memory_min_cpr\n";
  for (std::size_t k : std::set<std::size_t>(ks.begin(), ks.end())) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g", k, compute_min_cpr(hw, k), memory_min_cpr(hw, k));
    out << buf << '\n';
  }
}

// --- Config ----------------------------------------------------------------------

void GridConfig::validate() const {
  if (strategies.empty() || workers.empty() || n_rows.empty() || n_cols.empty() || n_chunks.empty()) {
    throw InputError("every grid axis needs at least one value");
  }
  for (auto w : workers) {
    if (w == 0 || w > kMaxWorkers) throw InputError("workers must be in [1, " + std::to_string(kMaxWorkers) + "]");
  }
  for (auto n : n_rows) if (n == 0) throw InputError("N must be >= 1");
  for (auto k : n_cols) if (k == 0) throw InputError("K must be >= 1");
  for (auto c : n_chunks) if (c == 0) throw InputError("chunks must be >= 1");
  if (n_shards == 0) throw InputError("shards must be >= 1");
  if (reps == 0 || evals_per_rep == 0) throw InputError("reps and evals must be >= 1");
  hw.validate();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw InputError(what + ": '" + s + "' is not a non-negative integer");
  return v;
}

double parse_real(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !std::isfinite(v)) throw InputError(what + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

std::vector<std::size_t> parse_count_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_u64(item, what));
  if (out.empty()) throw InputError(what + ": empty list");
  return out;
}

std::vector<glm::Strategy> parse_strategy_list(const std::string& text) {
  std::vector<glm::Strategy> out;
  for (const auto& item : split_list(text)) out.push_back(glm::parse_strategy(item));
  if (out.empty()) throw InputError("strategies: empty list");
  return out;
}

GridConfig parse_grid_config(std::istream& in, GridConfig cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string where = "config line " + std::to_string(line_no) + " (" + key + ")";
    if (key == "strategies") cfg.strategies = parse_strategy_list(val);
    else if (key == "workers") cfg.workers = parse_count_list(val, where);
    else if (key == "N" || key == "n_rows") cfg.n_rows = parse_count_list(val, where);
    else if (key == "K" || key == "n_cols") cfg.n_cols = parse_count_list(val, where);
    else if (key == "chunks" || key == "n_chunks") cfg.n_chunks = parse_count_list(val, where);
    else if (key == "shards") cfg.n_shards = parse_u64(val, where);
    else if (key == "op") {
      if (val == "loglike") cfg.op = GridOp::Loglike;
      else if (val == "grad") cfg.op = GridOp::Grad;
      else throw InputError(where + ": op must be loglike or grad");
    }
    else if (key == "warmup") cfg.warmup = parse_u64(val, where);
    else if (key == "reps") cfg.reps = parse_u64(val, where);
    else if (key == "evals") cfg.evals_per_rep = parse_u64(val, where);
    else if (key == "seed") cfg.seed = parse_u64(val, where);
    else if (key == "cpu_clock_ghz") cfg.hw.cpu_clock_ghz = parse_real(val, where);
    else if (key == "sockets") cfg.hw.sockets = parse_u64(val, where);
    else if (key == "cores_per_socket") cfg.hw.cores_per_socket = parse_u64(val, where);
    else if (key == "vector_bits") cfg.hw.vector_bits = parse_u64(val, where);
    else if (key == "flops_per_lane_per_clock") cfg.hw.flops_per_lane_per_clock = parse_u64(val, where);
    else if (key == "mem_channels_per_socket") cfg.hw.mem_channels_per_socket = parse_u64(val, where);
    else if (key == "bytes_per_channel_per_mem_clock") cfg.hw.bytes_per_channel_per_mem_clock = parse_u64(val, where);
    else if (key == "mem_clock_ghz") cfg.hw.mem_clock_ghz = parse_real(val, where);
    else throw InputError(where + ": unknown key");
  }
  cfg.validate();
  return cfg;
}

GridConfig read_grid_config_file(const std::string& path, GridConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  return parse_grid_config(in, std::move(base));
}

// --- Grid runner -----------------------------------------------------------------

namespace {

std::string cell_label(const GridConfig& cfg, glm::Strategy s) {
  std::string l(glm::to_string(s));
  if (cfg.op == GridOp::Grad) l += "-grad";
  return l;
}

double run_once(const GridConfig& cfg, const glm::DesignMatrix& data, std::span<const double> beta,
                const glm::ExecPlan& plan) {
  if (cfg.op == GridOp::Grad) return glm::loglike_grad(data, beta, plan).f;
  return glm::loglike(data, beta, plan);
}

}  // namespace

std::vector<BenchRecord> run_grid(const GridConfig& cfg) {
  cfg.validate();
  std::vector<BenchRecord> out;
  std::map<std::pair<std::size_t, std::size_t>, glm::SyntheticGlm> datasets;
  volatile double sink = 0.0;

  for (auto strategy : cfg.strategies) {
    for (auto workers : cfg.workers) {
      for (auto n : cfg.n_rows) {
        for (auto k : cfg.n_cols) {
          for (auto chunks : cfg.n_chunks) {
            const std::string label = cell_label(cfg, strategy);
            try {
              auto it = datasets.find({n, k});
              if (it == datasets.end()) {
                it = datasets.emplace(std::make_pair(n, k), glm::synthetic_glm(n, k, cfg.seed)).first;
              }
              const auto& data = it->second.data;
              const glm::ExecPlan plan{strategy, workers, chunks, cfg.n_shards};
              glm::validate(plan);

              // One beta per evaluation, generated up front.
              const std::size_t total = cfg.warmup + cfg.reps * cfg.evals_per_rep;
              std::vector<double> betas(total * k);
              rng::DeviateBuffer nb(rng::DeviateKind::StdNormal, cfg.seed, rng::derive_stream(cfg.seed, 7));
              nb.take(betas);
              for (double& b : betas) b *= 0.1;
              auto beta_at = [&](std::size_t e) { return std::span<const double>(betas).subspan(e * k, k); };

              std::size_t e = 0;
              for (; e < cfg.warmup; ++e) sink = sink + run_once(cfg, data, beta_at(e), plan);
              std::vector<double> walls;
              for (std::size_t r = 0; r < cfg.reps; ++r) {
                const auto t0 = Clock::now();
                for (std::size_t j = 0; j < cfg.evals_per_rep; ++j, ++e) {
                  sink = sink + run_once(cfg, data, beta_at(e), plan);
                }
                walls.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
              }
              std::nth_element(walls.begin(), walls.begin() + walls.size() / 2, walls.end());
              out.push_back(make_record(label, n, k, workers, chunks, walls[walls.size() / 2],
                                        cfg.evals_per_rep, cfg.hw.cpu_clock_ghz));
            } catch (const std::exception& ex) {
              BenchRecord r{label, n, k, workers, chunks, 0.0, 0.0, 0, std::string("failed: ") + ex.what()};
              out.push_back(std::move(r));
            }
          }
        }
      }
    }
  }
  return out;
}

double empty_region_seconds(std::size_t workers, std::size_t iterations) {
  if (iterations == 0) throw InputError("iterations must be >= 1");
  auto noop = [](std::size_t) {};
  parallel_region(workers, noop);  // spin up helpers
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < iterations; ++i) parallel_region(workers, noop);
  return std::chrono::duration<double>(Clock::now() - t0).count() / static_cast<double>(iterations);
}

}  // namespace mcmcperf::perf
