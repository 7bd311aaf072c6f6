#pragma once
// Fork-join worker pool with static partitioning, plus the software counters
// used to account for parallel regions and reduction merges.

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mcmcperf {

inline constexpr std::size_t kMaxWorkers = 256;

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Splits [0, n) into `parts` contiguous ranges; the first n % parts ranges
/// get one extra row.
RowRange static_partition(std::size_t n, std::size_t parts, std::size_t index);

struct ParallelStats {
  std::uint64_t regions = 0;  // fork-join regions entered
  std::uint64_t merges = 0;   // worker-private accumulators folded into a shared result
};

ParallelStats parallel_stats();
void reset_parallel_stats();
void count_merges(std::uint64_t n);

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t reserve_threads = 0);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  /// Process-wide pool; grows on demand.
  static WorkerPool& shared();

  /// Runs fn(w) for w in [0, workers) and returns when all have finished.
  /// The calling thread acts as worker 0. Counts as one parallel region.
  /// Called from inside a region, the workers run sequentially on the
  /// calling thread. The first exception thrown by any worker is rethrown.
  void run(std::size_t workers, const std::function<void(std::size_t)>& fn);

  std::size_t thread_count() const;

 private:
  void grow(std::size_t helpers);
  void loop(std::size_t id, std::uint64_t seen);

  std::mutex run_mu_;
  mutable std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  std::vector<std::thread> threads_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t task_workers_ = 0;
  std::uint64_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Convenience wrapper over WorkerPool::shared().run().
void parallel_region(std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace mcmcperf
