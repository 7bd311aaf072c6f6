#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "../oracles/oracle_data.hpp"
#include "mcmcperf/rng.hpp"
#include "mcmcperf/simd/dispatch.hpp"
#include "util.hpp"

using namespace mcmcperf;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> grid(std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(simd::philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(simd::philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(simd::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform stream matches the reference mapping") {
  for (auto lv : testutil::levels()) {
    simd::ScopedLevel scope(lv);
    for (std::size_t first = 0; first < 3; ++first) {
      std::vector<double> out(9 - first);
      simd::active().philox_uniform(oracle::kStreamKey, oracle::kStreamId, first, out.data(), out.size());
      for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == oracle::kUniforms[first + i]);
    }
  }
}

TEST_CASE("normal stream matches the reference Box-Muller") {
  CHECK(rng::derive_stream(3, 5) == oracle::kDerive_3_5);
  for (auto lv : testutil::levels()) {
    simd::ScopedLevel scope(lv);
    rng::DeviateBuffer nb(rng::DeviateKind::StdNormal, oracle::kStreamKey, oracle::kStreamId, 5);
    for (double want : oracle::kNormals) CHECK(nb.next() == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("scalar and avx2 tables agree") {
  if (!simd::supported(simd::Level::Avx2)) return;
  const auto& s = simd::scalar_kernels();
  const auto& a = *simd::avx2_kernels();

  SUBCASE("philox and box-muller are bit-identical for every offset and length") {
    for (std::uint64_t first : {0u, 1u, 2u, 7u, 8u, 9u}) {
      for (std::size_t n : {1u, 2u, 3u, 7u, 8u, 15u, 16u, 17u, 100u}) {
        std::vector<double> x(n), y(n);
        s.philox_uniform(99, 1234, first, x.data(), n);
        a.philox_uniform(99, 1234, first, y.data(), n);
        CHECK(same_bits(x, y));
      }
    }
    for (std::size_t pairs : {1u, 2u, 3u, 4u, 5u, 64u, 67u}) {
      std::vector<double> u(2 * pairs), x(2 * pairs), y(2 * pairs);
      s.philox_uniform(5, 6, 0, u.data(), u.size());
      s.box_muller(u.data(), x.data(), pairs);
      a.box_muller(u.data(), y.data(), pairs);
      CHECK(same_bits(x, y));
    }
  }

  SUBCASE("elementwise maps are bit-identical") {
    const auto z = grid(1003, -750.0, 750.0);
    const auto zs = grid(1001, -40.0, 40.0);
    for (const auto* zz : {&z, &zs}) {
      const std::size_t n = zz->size();
      std::vector<double> p1(n), p2(n), y(n), g1(n), g2(n), u(n), s1(n), s2(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = (i % 3 == 0) ? 1.0 : 0.0;
      s.philox_uniform(1, 2, 0, u.data(), n);
      s.sigmoid(zz->data(), p1.data(), n);
      a.sigmoid(zz->data(), p2.data(), n);
      CHECK(same_bits(p1, p2));
      s.spin_threshold(zz->data(), u.data(), s1.data(), n);
      a.spin_threshold(zz->data(), u.data(), s2.data(), n);
      CHECK(same_bits(s1, s2));
      const double f1 = s.loglike_grad_terms(zz->data(), y.data(), n, g1.data());
      const double f2 = a.loglike_grad_terms(zz->data(), y.data(), n, g2.data());
      CHECK(same_bits(g1, g2));
      CHECK(testutil::rel_err(f1, f2) < 1e-13);
      CHECK(testutil::rel_err(s.loglike_terms(zz->data(), y.data(), n), f1) < 1e-13);
      CHECK(testutil::rel_err(a.loglike_terms(zz->data(), y.data(), n), f1) < 1e-13);
      std::vector<double> c(n, 0.25), a1 = *zz, a2 = *zz;
      s.axpy(0.7, c.data(), a1.data(), n);
      a.axpy(0.7, c.data(), a2.data(), n);
      CHECK(same_bits(a1, a2));
    }
  }

  SUBCASE("row products agree to rounding") {
    for (std::size_t k : {1u, 3u, 4u, 7u, 8u, 50u, 101u}) {
      const std::size_t rows = 37;
      std::vector<double> x(rows * k), beta(k), o1(rows), o2(rows), v(rows);
      s.philox_uniform(3, 4, 0, x.data(), x.size());
      s.philox_uniform(3, 5, 0, beta.data(), k);
      s.philox_uniform(3, 6, 0, v.data(), rows);
      s.gemv_rows(x.data(), rows, k, beta.data(), o1.data());
      a.gemv_rows(x.data(), rows, k, beta.data(), o2.data());
      for (std::size_t r = 0; r < rows; ++r) CHECK(testutil::rel_err(o1[r], o2[r]) < 1e-14);
      std::vector<double> g1(k, 0.0), g2(k, 0.0);
      s.gemv_t_acc(x.data(), rows, k, v.data(), g1.data());
      a.gemv_t_acc(x.data(), rows, k, v.data(), g2.data());
      for (std::size_t j = 0; j < k; ++j) CHECK(testutil::rel_err(g1[j], g2[j]) < 1e-13);
    }
  }
}

TEST_CASE("transcendental kernels track libm") {
  for (auto lv : testutil::levels()) {
    simd::ScopedLevel scope(lv);
    const auto& kr = simd::active();
    const auto z = grid(20001, -700.0, 700.0);
    std::vector<double> p(z.size());
    kr.sigmoid(z.data(), p.data(), z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double want = z[i] >= 0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
      CHECK(testutil::rel_err(p[i], want, 1e-300) < 4e-16);
    }
    for (double t : grid(4001, -300.0, 300.0)) {
      for (double y : {0.0, 1.0}) {
        const double got = kr.loglike_terms(&t, &y, 1);
        const double sp = t >= 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
        const double want = -((1.0 - y) * t + sp);
        CHECK(std::fabs(got - want) <= 4e-16 * std::max(1.0, std::fabs(want)));
      }
    }
  }
}

TEST_CASE("level selection") {
  CHECK(simd::supported(simd::Level::Scalar));
  {
    simd::ScopedLevel scope(simd::Level::Scalar);
    CHECK(simd::active().level == simd::Level::Scalar);
  }
  CHECK(simd::active().level == simd::detect());
}

}  // TEST_SUITE
