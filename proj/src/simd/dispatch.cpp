#include "mcmcperf/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace mcmcperf::simd {

namespace {

bool cpu_has_avx2_fma() {
#if defined(MCMCPERF_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels kScalar = detail::make_scalar_kernels();

#if defined(MCMCPERF_HAVE_AVX2_TU)
const Kernels kAvx2 = detail::make_avx2_kernels();
#endif

Level initial_level() {
  if (const char* env = std::getenv("MCMCPERF_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Level::Scalar;
    if (want == "avx2" && cpu_has_avx2_fma()) return Level::Avx2;
  }
  return detect();
}

const Kernels* table_for(Level level) {
  return level == Level::Avx2 ? avx2_kernels() : &kScalar;
}

std::atomic<const Kernels*>& current() {
  static std::atomic<const Kernels*> table{table_for(initial_level())};
  return table;
}

}  // namespace

std::string_view to_string(Level level) {
  return level == Level::Avx2 ? "avx2" : "scalar";
}

const Kernels& scalar_kernels() { return kScalar; }

const Kernels* avx2_kernels() {
#if defined(MCMCPERF_HAVE_AVX2_TU)
  static const bool ok = cpu_has_avx2_fma();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

Level detect() { return avx2_kernels() ? Level::Avx2 : Level::Scalar; }

bool supported(Level level) { return table_for(level) != nullptr; }

const Kernels& active() { return *current().load(std::memory_order_acquire); }

void select(Level level) {
  const Kernels* t = table_for(level);
  if (!t) throw std::invalid_argument("SIMD level not supported on this machine: " +
                                      std::string(to_string(level)));
  current().store(t, std::memory_order_release);
}

ScopedLevel::ScopedLevel(Level level) : previous_(active().level) { select(level); }

ScopedLevel::~ScopedLevel() { select(previous_); }

}  // namespace mcmcperf::simd
