#pragma once
// Elementary functions written once against a lane-ops policy so that the
// scalar reference kernels and the AVX2 kernels execute the same sequence of
// IEEE operations. With -ffp-contract=off both produce bit-identical results.
//
// A policy provides:
//   using V, M;                       value and mask types
//   V set1(double)
//   V add/sub/mul/div/fma(a, b[, c])  fma(a,b,c) = a*b + c, single rounding
//   V abs, neg, min, max, sqrt, round_nearest
//   M lt, le, eq(a, b)
//   M mask_or(M, M)
//   V select(M, a, b)                 a where mask set, else b
//   V pow2i(V n)                      2^n for integral n in [-1022, 1023]
//   void frexp1(V x, V& e, V& m)      x = m * 2^e with m in [1,2), x normal

#include <cstdint>

namespace mcmcperf::simd {

namespace vm {
inline constexpr double kLog2e = 1.4426950408889634073599;
inline constexpr double kLn2Hi = 6.93145751953125e-1;
inline constexpr double kLn2Lo = 1.42860682030941723212e-6;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kTwoPi = 6.28318530717958647692;
inline constexpr double kExpFloor = -708.0;
}  // namespace vm

template <class Ops>
struct VecMath {
  using V = typename Ops::V;
  using M = typename Ops::M;

  /// exp(x) for x <= 0. Inputs below -708 are clamped (result ~1e-308).
  static V exp_nonpos(V x) {
    x = Ops::max(x, Ops::set1(vm::kExpFloor));
    V n = Ops::round_nearest(Ops::mul(x, Ops::set1(vm::kLog2e)));
    V r = Ops::fma(n, Ops::set1(-vm::kLn2Hi), x);
    r = Ops::fma(n, Ops::set1(-vm::kLn2Lo), r);
    // Taylor series of exp on |r| <= ln2/2, degree 13.
    V p = Ops::set1(1.0 / 6227020800.0);
    p = Ops::fma(p, r, Ops::set1(1.0 / 479001600.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 39916800.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 3628800.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 362880.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 40320.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 5040.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 720.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 120.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 24.0));
    p = Ops::fma(p, r, Ops::set1(1.0 / 6.0));
    p = Ops::fma(p, r, Ops::set1(0.5));
    p = Ops::fma(p, r, Ops::set1(1.0));
    p = Ops::fma(p, r, Ops::set1(1.0));
    return Ops::mul(p, Ops::pow2i(n));
  }

  /// Natural log of a positive normal x.
  static V log_pos(V x) {
    V e, m;
    Ops::frexp1(x, e, m);
    M big = Ops::lt(Ops::set1(vm::kSqrt2), m);
    m = Ops::select(big, Ops::mul(m, Ops::set1(0.5)), m);
    e = Ops::select(big, Ops::add(e, Ops::set1(1.0)), e);
    V f = Ops::sub(m, Ops::set1(1.0));
    V s = Ops::div(f, Ops::add(Ops::set1(2.0), f));
    V s2 = Ops::mul(s, s);
    // log(m) = 2 atanh(s) = 2s + 2 s^3 (1/3 + s^2/5 + ...)
    V p = Ops::set1(1.0 / 23.0);
    p = Ops::fma(p, s2, Ops::set1(1.0 / 21.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 19.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 17.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 15.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 13.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 11.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 9.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 7.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 5.0));
    p = Ops::fma(p, s2, Ops::set1(1.0 / 3.0));
    V two_s = Ops::add(s, s);
    V logm = Ops::fma(Ops::mul(two_s, s2), p, two_s);
    V lo = Ops::fma(e, Ops::set1(vm::kLn2Lo), logm);
    return Ops::fma(e, Ops::set1(vm::kLn2Hi), lo);
  }

  /// log(1 + x) for x in [0, 1].
  static V log1p_unit(V x) {
    V w = Ops::add(Ops::set1(1.0), x);
    V c = Ops::sub(x, Ops::sub(w, Ops::set1(1.0)));
    return Ops::add(log_pos(w), Ops::div(c, w));
  }

  /// log(1 + exp(-|t|)) + max(-t, 0), i.e. log(1 + exp(-t)) without overflow.
  static V softplus_neg(V t) {
    V e = exp_nonpos(Ops::neg(Ops::abs(t)));
    return Ops::add(Ops::max(Ops::neg(t), Ops::set1(0.0)), log1p_unit(e));
  }

  /// 1 / (1 + exp(-z)).
  static V sigmoid(V z) {
    V e = exp_nonpos(Ops::neg(Ops::abs(z)));
    V d = Ops::add(Ops::set1(1.0), e);
    M neg = Ops::lt(z, Ops::set1(0.0));
    return Ops::div(Ops::select(neg, e, Ops::set1(1.0)), d);
  }

  /// Both pieces of the logistic log-likelihood from one exponential:
  /// softplus = log(1 + exp(-t)), sig = 1/(1 + exp(-t)).
  static void logistic_parts(V t, V& softplus, V& sig) {
    V e = exp_nonpos(Ops::neg(Ops::abs(t)));
    softplus = Ops::add(Ops::max(Ops::neg(t), Ops::set1(0.0)), log1p_unit(e));
    V d = Ops::add(Ops::set1(1.0), e);
    M neg = Ops::lt(t, Ops::set1(0.0));
    sig = Ops::div(Ops::select(neg, e, Ops::set1(1.0)), d);
  }

  /// -[(1 - y) t + log(1 + exp(-t))]
  static V loglike_term(V t, V y) {
    V a = Ops::mul(Ops::sub(Ops::set1(1.0), y), t);
    return Ops::neg(Ops::add(a, softplus_neg(t)));
  }

  /// sin and cos of 2*pi*t for t in [0, 1]. The reduction t - k/4 is exact
  /// for t on a 2^-54 grid, which all generated uniforms are.
  static void sincos_turns(V t, V& s, V& c) {
    V v = Ops::sub(t, Ops::round_nearest(t));
    V k = Ops::round_nearest(Ops::mul(v, Ops::set1(4.0)));
    V r = Ops::fma(k, Ops::set1(-0.25), v);
    V th = Ops::mul(r, Ops::set1(vm::kTwoPi));
    V th2 = Ops::mul(th, th);

    V ps = Ops::set1(1.0 / 355687428096000.0);          // 1/17!
    ps = Ops::fma(ps, th2, Ops::set1(-1.0 / 1307674368000.0));
    ps = Ops::fma(ps, th2, Ops::set1(1.0 / 6227020800.0));
    ps = Ops::fma(ps, th2, Ops::set1(-1.0 / 39916800.0));
    ps = Ops::fma(ps, th2, Ops::set1(1.0 / 362880.0));
    ps = Ops::fma(ps, th2, Ops::set1(-1.0 / 5040.0));
    ps = Ops::fma(ps, th2, Ops::set1(1.0 / 120.0));
    ps = Ops::fma(ps, th2, Ops::set1(-1.0 / 6.0));
    V sn = Ops::fma(Ops::mul(ps, th2), th, th);

    V pc = Ops::set1(1.0 / 6402373705728000.0);          // 1/18!
    pc = Ops::fma(pc, th2, Ops::set1(-1.0 / 20922789888000.0));
    pc = Ops::fma(pc, th2, Ops::set1(1.0 / 87178291200.0));
    pc = Ops::fma(pc, th2, Ops::set1(-1.0 / 479001600.0));
    pc = Ops::fma(pc, th2, Ops::set1(1.0 / 3628800.0));
    pc = Ops::fma(pc, th2, Ops::set1(-1.0 / 40320.0));
    pc = Ops::fma(pc, th2, Ops::set1(1.0 / 720.0));
    pc = Ops::fma(pc, th2, Ops::set1(-1.0 / 24.0));
    pc = Ops::fma(pc, th2, Ops::set1(0.5));
    V cs = Ops::fma(Ops::neg(pc), th2, Ops::set1(1.0));

    // Quadrant k in {-2..2}: rotate (sn, cs) by k quarter turns.
    V ak = Ops::abs(k);
    M odd = Ops::eq(ak, Ops::set1(1.0));
    M two = Ops::eq(ak, Ops::set1(2.0));
    M neg_s = Ops::mask_or(Ops::eq(k, Ops::set1(-1.0)), two);
    M neg_c = Ops::mask_or(Ops::eq(k, Ops::set1(1.0)), two);
    V s0 = Ops::select(odd, cs, sn);
    V c0 = Ops::select(odd, sn, cs);
    s = Ops::select(neg_s, Ops::neg(s0), s0);
    c = Ops::select(neg_c, Ops::neg(c0), c0);
  }
};

}  // namespace mcmcperf::simd
