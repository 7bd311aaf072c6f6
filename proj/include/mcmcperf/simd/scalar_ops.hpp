#pragma once
// Scalar lane policy for VecMath. Mirrors the AVX2 policy operation for
// operation; max/min follow the x86 maxpd/minpd operand convention.

#include <bit>
#include <cmath>
#include <cstdint>

namespace mcmcperf::simd {

struct ScalarOps {
  using V = double;
  using M = bool;

  static V set1(double a) { return a; }
  static V add(V a, V b) { return a + b; }
  static V sub(V a, V b) { return a - b; }
  static V mul(V a, V b) { return a * b; }
  static V div(V a, V b) { return a / b; }
  static V fma(V a, V b, V c) { return std::fma(a, b, c); }
  static V neg(V a) { return -a; }
  static V abs(V a) { return std::fabs(a); }
  static V max(V a, V b) { return a > b ? a : b; }
  static V min(V a, V b) { return a < b ? a : b; }
  static V sqrt(V a) { return std::sqrt(a); }
  static V round_nearest(V a) { return std::nearbyint(a); }
  static M lt(V a, V b) { return a < b; }
  static M le(V a, V b) { return a <= b; }
  static M eq(V a, V b) { return a == b; }
  static M mask_or(M a, M b) { return a || b; }
  static V select(M m, V a, V b) { return m ? a : b; }
  static V pow2i(V n) {
    auto e = static_cast<std::int64_t>(n) + 1023;
    return std::bit_cast<double>(static_cast<std::uint64_t>(e) << 52);
  }
  static void frexp1(V x, V& e, V& m) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    e = static_cast<double>(static_cast<std::int64_t>((bits >> 52) & 0x7ff) - 1023);
    m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
  }
};

}  // namespace mcmcperf::simd
