#include "mcmcperf/parallel.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace mcmcperf {

namespace {

std::atomic<std::uint64_t> g_regions{0};
std::atomic<std::uint64_t> g_merges{0};
thread_local bool tl_in_region = false;

}  // namespace

RowRange static_partition(std::size_t n, std::size_t parts, std::size_t index) {
  if (parts == 0 || index >= parts) throw std::invalid_argument("static_partition: bad part index");
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  const std::size_t begin = index * base + (index < extra ? index : extra);
  return {begin, begin + base + (index < extra ? 1 : 0)};
}

ParallelStats parallel_stats() {
  return {g_regions.load(std::memory_order_relaxed), g_merges.load(std::memory_order_relaxed)};
}

void reset_parallel_stats() {
  g_regions.store(0, std::memory_order_relaxed);
  g_merges.store(0, std::memory_order_relaxed);
}

void count_merges(std::uint64_t n) { g_merges.fetch_add(n, std::memory_order_relaxed); }

WorkerPool::WorkerPool(std::size_t reserve_threads) {
  std::lock_guard lk(mu_);
  grow(reserve_threads);
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

WorkerPool& WorkerPool::shared() {
  static WorkerPool pool;
  return pool;
}

std::size_t WorkerPool::thread_count() const {
  std::lock_guard lk(mu_);
  return threads_.size();
}

// Caller holds mu_.
void WorkerPool::grow(std::size_t helpers) {
  while (threads_.size() < helpers) {
    const std::size_t id = threads_.size() + 1;
    threads_.emplace_back([this, id, seen = generation_] { loop(id, seen); });
  }
}

void WorkerPool::loop(std::size_t id, std::uint64_t seen) {
  std::unique_lock lk(mu_);
  for (;;) {
    start_cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
    if (stop_) return;
    seen = generation_;
    if (id >= task_workers_) continue;
    const auto* task = task_;
    lk.unlock();
    tl_in_region = true;
    std::exception_ptr err;
    try {
      (*task)(id);
    } catch (...) {
      err = std::current_exception();
    }
    tl_in_region = false;
    lk.lock();
    if (err && !error_) error_ = err;
    if (--pending_ == 0) done_cv_.notify_one();
  }
}

void WorkerPool::run(std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0 || workers > kMaxWorkers) {
    throw std::invalid_argument("worker count must be in [1, " + std::to_string(kMaxWorkers) + "]");
  }
  g_regions.fetch_add(1, std::memory_order_relaxed);

  if (workers == 1 || tl_in_region) {
    for (std::size_t w = 0; w < workers; ++w) fn(w);
    return;
  }

  std::lock_guard run_lk(run_mu_);
  {
    std::lock_guard lk(mu_);
    grow(workers - 1);
    task_ = &fn;
    task_workers_ = workers;
    pending_ = workers - 1;
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();

  std::exception_ptr own;
  tl_in_region = true;
  try {
    fn(0);
  } catch (...) {
    own = std::current_exception();
  }
  tl_in_region = false;

  std::unique_lock lk(mu_);
  done_cv_.wait(lk, [&] { return pending_ == 0; });
  task_ = nullptr;
  std::exception_ptr err = own ? own : error_;
  error_ = nullptr;
  lk.unlock();
  if (err) std::rethrow_exception(err);
}

void parallel_region(std::size_t workers, const std::function<void(std::size_t)>& fn) {
  WorkerPool::shared().run(workers, fn);
}

}  // namespace mcmcperf
