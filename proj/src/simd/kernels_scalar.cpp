#include <bit>
#include <cstdint>

#include "kernels_internal.hpp"
#include "mcmcperf/simd/scalar_ops.hpp"
#include "mcmcperf/simd/vecmath.hpp"

namespace mcmcperf::simd {

using Math = VecMath<ScalarOps>;

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{detail::kPhiloxM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{detail::kPhiloxM1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += detail::kPhiloxW0;
    k[1] += detail::kPhiloxW1;
  }
  return c;
}

namespace {

// 52 random mantissa bits, offset by half a step: values lie on the odd
// multiples of 2^-53 and never hit 0 or 1.
double to_open_unit(std::uint64_t bits) {
  const double one_to_two = std::bit_cast<double>(0x3ff0000000000000ULL | (bits >> 12));
  return (one_to_two - 1.0) + 0x1p-53;
}

void gemv_rows(const double* x, std::size_t rows, std::size_t k,
               const double* beta, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * k;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += row[j] * beta[j];
    out[r] = s;
  }
}

void gemv_t_acc(const double* x, std::size_t rows, std::size_t k,
                const double* v, double* g) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * k;
    const double vr = v[r];
    for (std::size_t j = 0; j < k; ++j) g[j] += vr * row[j];
  }
}

double loglike_terms(const double* t, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += Math::loglike_term(t[i], y[i]);
  return s;
}

double loglike_grad_terms(const double* t, const double* y, std::size_t n,
                          double* gf) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sp, sig;
    Math::logistic_parts(t[i], sp, sig);
    s += -((1.0 - y[i]) * t[i] + sp);
    gf[i] = y[i] - sig;
  }
  return s;
}

double loglike_shifted(const double* t, const double* col, double delta,
                       const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i] + delta * col[i];
    s += Math::loglike_term(ti, y[i]);
  }
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void sigmoid(const double* z, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = Math::sigmoid(z[i]);
}

void spin_threshold(const double* z, const double* u, double* s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) s[i] = u[i] < Math::sigmoid(z[i]) ? 1.0 : -1.0;
}

void philox_uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t first,
                    double* out, std::size_t n) {
  const std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(key),
                                       static_cast<std::uint32_t>(key >> 32)};
  std::uint64_t i = first;
  std::size_t j = 0;
  while (j < n) {
    const std::uint64_t b = i >> 1;
    const auto w = philox4x32_10({static_cast<std::uint32_t>(b),
                                  static_cast<std::uint32_t>(b >> 32),
                                  static_cast<std::uint32_t>(stream),
                                  static_cast<std::uint32_t>(stream >> 32)},
                                 k);
    if ((i & 1) == 0) {
      out[j++] = to_open_unit((std::uint64_t{w[1]} << 32) | w[0]);
      ++i;
      if (j == n) break;
    }
    out[j++] = to_open_unit((std::uint64_t{w[3]} << 32) | w[2]);
    ++i;
  }
}

void box_muller(const double* u, double* out, std::size_t pairs) {
  for (std::size_t p = 0; p < pairs; ++p) {
    const double r = ScalarOps::sqrt(-2.0 * Math::log_pos(u[2 * p]));
    double s, c;
    Math::sincos_turns(u[2 * p + 1], s, c);
    out[2 * p] = r * c;
    out[2 * p + 1] = r * s;
  }
}

}  // namespace

namespace detail {

Kernels make_scalar_kernels() {
  return Kernels{Level::Scalar,  &gemv_rows, &gemv_t_acc,     &loglike_terms,
                 &loglike_grad_terms, &loglike_shifted, &axpy, &sigmoid,
                 &spin_threshold, &philox_uniform, &box_muller};
}

}  // namespace detail
}  // namespace mcmcperf::simd
