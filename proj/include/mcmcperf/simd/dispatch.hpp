#pragma once
// Runtime-selected kernel tables. Every entry has a scalar reference
// implementation; the AVX2+FMA table is chosen when the CPU supports it.
// MCMCPERF_SIMD=scalar|avx2 in the environment overrides detection.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace mcmcperf::simd {

enum class Level { Scalar, Avx2 };

std::string_view to_string(Level level);

struct Kernels {
  Level level;

  // out[r] = <x[r*k .. r*k+k), beta> for r in [0, rows)
  void (*gemv_rows)(const double* x, std::size_t rows, std::size_t k,
                    const double* beta, double* out);
  // g[j] += sum_r v[r] * x[r*k + j]
  void (*gemv_t_acc)(const double* x, std::size_t rows, std::size_t k,
                     const double* v, double* g);
  // sum_n -[(1-y_n) t_n + log(1+exp(-t_n))]
  double (*loglike_terms)(const double* t, const double* y, std::size_t n);
  // as loglike_terms, and gf[n] = y_n - 1/(1+exp(-t_n))
  double (*loglike_grad_terms)(const double* t, const double* y, std::size_t n,
                               double* gf);
  // loglike_terms evaluated at t_n + delta * col_n
  double (*loglike_shifted)(const double* t, const double* col, double delta,
                            const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // p = 1/(1+exp(-z))
  void (*sigmoid)(const double* z, double* p, std::size_t n);
  // s = u < sigmoid(z) ? +1 : -1
  void (*spin_threshold)(const double* z, const double* u, double* s, std::size_t n);
  // Uniform (0,1) deviates first_index .. first_index+n of Philox stream (key, stream).
  void (*philox_uniform)(std::uint64_t key, std::uint64_t stream,
                         std::uint64_t first_index, double* out, std::size_t n);
  // Box-Muller on consecutive uniform pairs: out[2p] = R cos, out[2p+1] = R sin.
  void (*box_muller)(const double* u, double* out, std::size_t pairs);
};

const Kernels& scalar_kernels();
/// nullptr when the AVX2 translation unit is absent or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();

Level detect();
bool supported(Level level);

/// Table currently used by the library.
const Kernels& active();
/// Throws std::invalid_argument if the level is unsupported here.
void select(Level level);

/// RAII override, used by equivalence tests.
class ScopedLevel {
 public:
  explicit ScopedLevel(Level level);
  ~ScopedLevel();
  ScopedLevel(const ScopedLevel&) = delete;
  ScopedLevel& operator=(const ScopedLevel&) = delete;

 private:
  Level previous_;
};

/// The Philox4x32-10 bijection on one 128-bit counter block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

}  // namespace mcmcperf::simd
