// AVX2 + FMA kernels. Compiled with -mavx2 -mfma and only reached through the
// runtime dispatch table, so nothing here may be an inline/template symbol
// shared with the portable translation units.

#include <immintrin.h>

#include <cstdint>
#include <cstring>

#include "kernels_internal.hpp"
#include "mcmcperf/simd/vecmath.hpp"

namespace mcmcperf::simd {
namespace {

struct Avx2Ops {
  using V = __m256d;
  using M = __m256d;

  static V set1(double a) { return _mm256_set1_pd(a); }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
  static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
  static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
  static V div(V a, V b) { return _mm256_div_pd(a, b); }
  static V fma(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
  static V neg(V a) { return _mm256_xor_pd(a, _mm256_set1_pd(-0.0)); }
  static V abs(V a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a); }
  static V max(V a, V b) { return _mm256_max_pd(a, b); }
  static V min(V a, V b) { return _mm256_min_pd(a, b); }
  static V sqrt(V a) { return _mm256_sqrt_pd(a); }
  static V round_nearest(V a) {
    return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  }
  static M lt(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static M le(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
  static M eq(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_EQ_OQ); }
  static M mask_or(M a, M b) { return _mm256_or_pd(a, b); }
  static V select(M m, V a, V b) { return _mm256_blendv_pd(b, a, m); }
  static V pow2i(V n) {
    const __m256d magic = _mm256_set1_pd(0x1.8p52);
    __m256i i = _mm256_castpd_si256(_mm256_add_pd(n, magic));
    i = _mm256_sub_epi64(i, _mm256_castpd_si256(magic));
    i = _mm256_add_epi64(i, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(i, 52));
  }
  static void frexp1(V x, V& e, V& m) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i two52 = _mm256_set1_epi64x(0x4330000000000000LL);
    __m256i eb = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
    e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(eb, two52)),
                      _mm256_set1_pd(0x1p52 + 1023.0));
    const __m256i mant = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL));
    m = _mm256_castsi256_pd(_mm256_or_si256(mant, _mm256_set1_epi64x(0x3ff0000000000000LL)));
  }
};

using Math = VecMath<Avx2Ops>;

// Scalar tails need the same math as the reference path; route them through a
// one-lane broadcast so this TU stays self-contained.
double lane0(__m256d v) { return _mm256_cvtsd_f64(v); }

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void gemv_rows(const double* x, std::size_t rows, std::size_t k,
               const double* beta, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * k;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= k; j += 8) {
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(beta + j), a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(beta + j + 4), a1);
    }
    for (; j + 4 <= k; j += 4) {
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(beta + j), a0);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; j < k; ++j) s += row[j] * beta[j];
    out[r] = s;
  }
}

void gemv_t_acc(const double* x, std::size_t rows, std::size_t k,
                const double* v, double* g) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = x + r * k;
    const __m256d vr = _mm256_set1_pd(v[r]);
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      _mm256_storeu_pd(g + j, _mm256_fmadd_pd(vr, _mm256_loadu_pd(row + j),
                                              _mm256_loadu_pd(g + j)));
    }
    for (; j < k; ++j) g[j] += v[r] * row[j];
  }
}

double loglike_terms(const double* t, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, Math::loglike_term(_mm256_loadu_pd(t + i), _mm256_loadu_pd(y + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    s += lane0(Math::loglike_term(_mm256_set1_pd(t[i]), _mm256_set1_pd(y[i])));
  }
  return s;
}

double loglike_grad_terms(const double* t, const double* y, std::size_t n,
                          double* gf) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    __m256d sp, sig;
    Math::logistic_parts(tv, sp, sig);
    const __m256d term = _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(one, yv), tv), sp);
    acc = _mm256_sub_pd(acc, term);
    _mm256_storeu_pd(gf + i, _mm256_sub_pd(yv, sig));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    __m256d sp, sig;
    Math::logistic_parts(_mm256_set1_pd(t[i]), sp, sig);
    s += -((1.0 - y[i]) * t[i] + lane0(sp));
    gf[i] = y[i] - lane0(sig);
  }
  return s;
}

double loglike_shifted(const double* t, const double* col, double delta,
                       const double* y, std::size_t n) {
  const __m256d d = _mm256_set1_pd(delta);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_add_pd(_mm256_loadu_pd(t + i),
                                     _mm256_mul_pd(d, _mm256_loadu_pd(col + i)));
    acc = _mm256_add_pd(acc, Math::loglike_term(tv, _mm256_loadu_pd(y + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double ti = t[i] + delta * col[i];
    s += lane0(Math::loglike_term(_mm256_set1_pd(ti), _mm256_set1_pd(y[i])));
  }
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                                          _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void sigmoid(const double* z, double* p, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(p + i, Math::sigmoid(_mm256_loadu_pd(z + i)));
  for (; i < n; ++i) p[i] = lane0(Math::sigmoid(_mm256_set1_pd(z[i])));
}

void spin_threshold(const double* z, const double* u, double* s, std::size_t n) {
  const __m256d up = _mm256_set1_pd(1.0);
  const __m256d dn = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = Math::sigmoid(_mm256_loadu_pd(z + i));
    const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(u + i), p, _CMP_LT_OQ);
    _mm256_storeu_pd(s + i, _mm256_blendv_pd(dn, up, m));
  }
  for (; i < n; ++i) s[i] = u[i] < lane0(Math::sigmoid(_mm256_set1_pd(z[i]))) ? 1.0 : -1.0;
}

// --- Philox4x32-10, eight counter blocks per pass -------------------------

inline void mulhilo8(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

void philox_block1(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{detail::kPhiloxM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{detail::kPhiloxM1} * c[2];
    const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0;
    const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1;
    c[1] = static_cast<std::uint32_t>(p1);
    c[3] = static_cast<std::uint32_t>(p0);
    c[0] = n0;
    c[2] = n2;
    k0 += detail::kPhiloxW0;
    k1 += detail::kPhiloxW1;
  }
}

double to_open_unit(std::uint64_t bits) {
  std::uint64_t b = 0x3ff0000000000000ULL | (bits >> 12);
  double one_to_two;
  std::memcpy(&one_to_two, &b, sizeof b);
  return (one_to_two - 1.0) + 0x1p-53;
}

void philox_uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t first,
                    double* out, std::size_t n) {
  const auto k0 = static_cast<std::uint32_t>(key);
  const auto k1 = static_cast<std::uint32_t>(key >> 32);
  const auto s0 = static_cast<std::uint32_t>(stream);
  const auto s1 = static_cast<std::uint32_t>(stream >> 32);
  std::uint64_t i = first;
  std::size_t j = 0;

  auto one_block = [&](std::uint64_t b, std::uint32_t w[4]) {
    w[0] = static_cast<std::uint32_t>(b);
    w[1] = static_cast<std::uint32_t>(b >> 32);
    w[2] = s0;
    w[3] = s1;
    philox_block1(w, k0, k1);
  };

  if (n > 0 && (i & 1) != 0) {
    std::uint32_t w[4];
    one_block(i >> 1, w);
    out[j++] = to_open_unit((std::uint64_t{w[3]} << 32) | w[2]);
    ++i;
  }

  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM1));
  alignas(32) std::uint32_t lo[8], hi[8];
  alignas(32) std::uint32_t w0[8], w1[8], w2[8], w3[8];
  while (n - j >= 16) {
    const std::uint64_t b = i >> 1;
    for (int l = 0; l < 8; ++l) {
      lo[l] = static_cast<std::uint32_t>(b + l);
      hi[l] = static_cast<std::uint32_t>((b + l) >> 32);
    }
    __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo));
    __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi));
    __m256i c2 = _mm256_set1_epi32(static_cast<int>(s0));
    __m256i c3 = _mm256_set1_epi32(static_cast<int>(s1));
    std::uint32_t kk0 = k0, kk1 = k1;
    for (int round = 0; round < 10; ++round) {
      __m256i hi0, lo0, hi1, lo1;
      mulhilo8(c0, m0, hi0, lo0);
      mulhilo8(c2, m1, hi1, lo1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1),
                                          _mm256_set1_epi32(static_cast<int>(kk0)));
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3),
                                          _mm256_set1_epi32(static_cast<int>(kk1)));
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      kk0 += detail::kPhiloxW0;
      kk1 += detail::kPhiloxW1;
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(w0), c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w1), c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w2), c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w3), c3);
    for (int l = 0; l < 8; ++l) {
      out[j + 2 * l] = to_open_unit((std::uint64_t{w1[l]} << 32) | w0[l]);
      out[j + 2 * l + 1] = to_open_unit((std::uint64_t{w3[l]} << 32) | w2[l]);
    }
    j += 16;
    i += 16;
  }

  while (j < n) {
    std::uint32_t w[4];
    one_block(i >> 1, w);
    out[j++] = to_open_unit((std::uint64_t{w[1]} << 32) | w[0]);
    ++i;
    if (j == n) break;
    out[j++] = to_open_unit((std::uint64_t{w[3]} << 32) | w[2]);
    ++i;
  }
}

void box_muller(const double* u, double* out, std::size_t pairs) {
  const __m256d m2 = _mm256_set1_pd(-2.0);
  std::size_t p = 0;
  for (; p + 4 <= pairs; p += 4) {
    const __m256d a = _mm256_loadu_pd(u + 2 * p);
    const __m256d b = _mm256_loadu_pd(u + 2 * p + 4);
    // lanes hold pairs {0, 2, 1, 3}
    const __m256d u1 = _mm256_unpacklo_pd(a, b);
    const __m256d u2 = _mm256_unpackhi_pd(a, b);
    const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(m2, Math::log_pos(u1)));
    __m256d s, c;
    Math::sincos_turns(u2, s, c);
    const __m256d z0 = _mm256_mul_pd(r, c);
    const __m256d z1 = _mm256_mul_pd(r, s);
    _mm256_storeu_pd(out + 2 * p, _mm256_unpacklo_pd(z0, z1));
    _mm256_storeu_pd(out + 2 * p + 4, _mm256_unpackhi_pd(z0, z1));
  }
  for (; p < pairs; ++p) {
    const __m256d u1 = _mm256_set1_pd(u[2 * p]);
    const __m256d u2 = _mm256_set1_pd(u[2 * p + 1]);
    const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(m2, Math::log_pos(u1)));
    __m256d s, c;
    Math::sincos_turns(u2, s, c);
    out[2 * p] = lane0(_mm256_mul_pd(r, c));
    out[2 * p + 1] = lane0(_mm256_mul_pd(r, s));
  }
}

}  // namespace

namespace detail {

Kernels make_avx2_kernels() {
  return Kernels{Level::Avx2,   &gemv_rows, &gemv_t_acc,     &loglike_terms,
                 &loglike_grad_terms, &loglike_shifted, &axpy, &sigmoid,
                 &spin_threshold, &philox_uniform, &box_muller};
}

}  // namespace detail
}  // namespace mcmcperf::simd
