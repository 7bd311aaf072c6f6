#include <doctest.h>

#include <atomic>
#include <stdexcept>

#include "mcmcperf/parallel.hpp"

using namespace mcmcperf;

TEST_SUITE("parallel") {

TEST_CASE("static partition covers the range") {
  for (std::size_t n : {0u, 1u, 7u, 100u, 101u}) {
    for (std::size_t parts : {1u, 2u, 3u, 8u, 16u}) {
      std::size_t expect = 0;
      for (std::size_t i = 0; i < parts; ++i) {
        const auto r = static_partition(n, parts, i);
        CHECK(r.begin == expect);
        CHECK(r.size() == n / parts + (i < n % parts ? 1 : 0));
        expect = r.end;
      }
      CHECK(expect == n);
    }
  }
}

TEST_CASE("every worker runs exactly once") {
  for (std::size_t w : {1u, 2u, 5u, 16u}) {
    std::vector<std::atomic<int>> hits(w);
    parallel_region(w, [&](std::size_t id) { hits[id].fetch_add(1); });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("region counter") {
  reset_parallel_stats();
  for (int i = 0; i < 5; ++i) parallel_region(3, [](std::size_t) {});
  count_merges(3);
  const auto s = parallel_stats();
  CHECK(s.regions == 5);
  CHECK(s.merges == 3);
  reset_parallel_stats();
  CHECK(parallel_stats().regions == 0);
}

TEST_CASE("worker exceptions propagate and the pool survives") {
  CHECK_THROWS_AS(parallel_region(4,
                                  [](std::size_t id) {
                                    if (id == 2) throw std::runtime_error("boom");
                                  }),
                  std::runtime_error);
  std::atomic<int> n{0};
  parallel_region(4, [&](std::size_t) { n.fetch_add(1); });
  CHECK(n.load() == 4);
}

TEST_CASE("nested regions run inline") {
  std::atomic<int> n{0};
  parallel_region(2, [&](std::size_t) {
    parallel_region(3, [&](std::size_t) { n.fetch_add(1); });
  });
  CHECK(n.load() == 6);
}

TEST_CASE("private pool") {
  WorkerPool pool(2);
  CHECK(pool.thread_count() >= 2);
  std::atomic<int> n{0};
  pool.run(6, [&](std::size_t id) { n.fetch_add(static_cast<int>(id)); });
  CHECK(n.load() == 15);
}

}  // TEST_SUITE
