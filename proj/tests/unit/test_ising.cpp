#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mcmcperf/ising.hpp"
#include "util.hpp"

using namespace mcmcperf;
using namespace mcmcperf::ising;

namespace {

IsingLattice random_lattice(std::size_t h, std::size_t w, double coupling, double bias_sd, std::uint64_t seed) {
  auto lat = make_lattice(h, w, coupling);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, seed, 1);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.s[i] = u.next() < 0.5 ? 1 : -1;
    lat.b[i] = bias_sd * (2.0 * u.next() - 1.0);
  }
  return lat;
}

std::size_t state_code(const ColorPartition& part, std::size_t n) {
  std::size_t code = 0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t p = 0; p < part.count(c); ++p) {
      if (part.packed_s[c][p] > 0) code |= std::size_t{1} << part.colors[c][p];
    }
  }
  return code & ((std::size_t{1} << n) - 1);
}

// Exact law by enumeration over all 2^n states.
std::vector<double> exact_law(IsingLattice lat) {
  const std::size_t n = lat.size();
  std::vector<double> p(std::size_t{1} << n);
  for (std::size_t code = 0; code < p.size(); ++code) {
    for (std::size_t i = 0; i < n; ++i) lat.s[i] = (code >> i) & 1 ? 1 : -1;
    p[code] = std::exp(log_weight(lat));
  }
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= z;
  return p;
}

double tv_after(const IsingLattice& lat, std::size_t sweeps, bool diff, std::uint64_t seed) {
  auto part = color_lattice(lat);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, seed, 2);
  ZCache zc(lat.w, part);
  std::vector<double> counts(std::size_t{1} << lat.size(), 0.0);
  for (std::size_t s = 0; s < sweeps; ++s) {
    if (diff) {
      gibbs_sweep_diff(part, zc, u);
    } else {
      gibbs_sweep(lat.w, part, u);
    }
    counts[state_code(part, lat.size())] += 1.0;
  }
  const auto exact = exact_law(lat);
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) tv += std::fabs(counts[i] / static_cast<double>(sweeps) - exact[i]);
  return 0.5 * tv;
}

}  // namespace

TEST_SUITE("ising") {

TEST_CASE("conditional probability") {
  CHECK(conditional_prob(0.0) == 0.5);
  CHECK(std::fabs(conditional_prob(1e3) - 1.0) < 1e-12);
  CHECK(conditional_prob(-1e3) >= 0.0);
  CHECK(conditional_prob(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("checkerboard coloring") {
  auto l22 = make_lattice(2, 2, 1.0);
  auto p22 = color_lattice(l22);
  CHECK(p22.colors[0] == std::vector<std::uint32_t>{0, 3});
  CHECK(p22.colors[1] == std::vector<std::uint32_t>{1, 2});
  auto l11 = make_lattice(1, 1, 1.0);
  auto p11 = color_lattice(l11);
  CHECK(p11.count(0) == 1);
  CHECK(p11.count(1) == 0);
  for (auto [h, w] : {std::pair{1, 7}, std::pair{5, 5}, std::pair{16, 9}, std::pair{31, 64}}) {
    auto lat = random_lattice(h, w, 0.5, 1.0, 3);
    auto part = color_lattice(lat);
    CHECK(same_color_edges(lat, part) == 0);
    CHECK(part.count(0) + part.count(1) == lat.size());
    // Sentinel slot holds zero, neighbour slots reference the other colour.
    for (int c = 0; c < 2; ++c) {
      CHECK(part.packed_s[c].back() == 0.0);
      for (auto j : part.packed_neighbor_idx[c]) CHECK(j <= part.sentinel(1 - c));
    }
    // pack -> unpack round trip
    auto copy = lat;
    std::fill(copy.s.begin(), copy.s.end(), std::int8_t{1});
    unpack(part, copy);
    CHECK(copy.s == lat.s);
  }
}

TEST_CASE("intra-colour update order is irrelevant") {
  auto lat = random_lattice(9, 11, 0.8, 1.0, 4);
  auto a = color_lattice(lat), b = a;
  rng::DeviateBuffer ua(rng::DeviateKind::Uniform01, 1, 1), ub(rng::DeviateKind::Uniform01, 1, 1);
  std::vector<std::uint32_t> o0(a.count(0)), o1(a.count(1));
  std::iota(o0.begin(), o0.end(), 0u);
  std::iota(o1.begin(), o1.end(), 0u);
  std::reverse(o0.begin(), o0.end());
  for (std::size_t i = 0; i + 1 < o1.size(); i += 2) std::swap(o1[i], o1[i + 1]);
  for (int s = 0; s < 20; ++s) {
    gibbs_sweep(lat.w, a, ua);
    gibbs_sweep_ordered(lat.w, b, ub, o0, o1);
    CHECK(a.packed_s == b.packed_s);
  }
}

TEST_CASE("sweeps are deterministic and worker-count independent") {
  auto lat = random_lattice(20, 17, 0.6, 1.0, 5);
  auto a = color_lattice(lat), b = a, c = a;
  rng::DeviateBuffer ua(rng::DeviateKind::Uniform01, 3, 1), ub(rng::DeviateKind::Uniform01, 3, 1),
      uc(rng::DeviateKind::Uniform01, 3, 1, 17);
  for (int s = 0; s < 30; ++s) {
    gibbs_sweep(lat.w, a, ua, 1);
    gibbs_sweep(lat.w, b, ub, 4);
    gibbs_sweep(lat.w, c, uc, 3);
  }
  CHECK(a.packed_s == b.packed_s);
  CHECK(a.packed_s == c.packed_s);
}

TEST_CASE("differential sweep reproduces the full sweep") {
  for (auto lv : testutil::levels()) {
    simd::ScopedLevel scope(lv);
    auto lat = random_lattice(23, 19, 0.9, 1.5, 6);
    auto a = color_lattice(lat), b = a;
    ZCache zc(lat.w, b);
    rng::DeviateBuffer ua(rng::DeviateKind::Uniform01, 4, 1), ub(rng::DeviateKind::Uniform01, 4, 1);
    for (int s = 0; s < 200; ++s) {
      gibbs_sweep(lat.w, a, ua);
      gibbs_sweep_diff(b, zc, ub);
      REQUIRE(a.packed_s == b.packed_s);
      CHECK(zc.max_drift(b) < 1e-10);
    }
    CHECK(zc.sweeps() == 200);
    CHECK(zc.total_flips() > 0);
  }
}

TEST_CASE("zero flips leave the cache unchanged") {
  // Strong positive bias with all spins up: nothing flips.
  auto lat = make_lattice(6, 6, 1.0);
  std::fill(lat.b.begin(), lat.b.end(), 60.0);
  auto part = color_lattice(lat);
  ZCache zc(lat.w, part);
  const std::vector<double> z0(zc.z(0).begin(), zc.z(0).end()), z1(zc.z(1).begin(), zc.z(1).end());
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, 1, 1);
  gibbs_sweep_diff(part, zc, u);
  CHECK(zc.last_flips() == 0);
  CHECK(std::vector<double>(zc.z(0).begin(), zc.z(0).end()) == z0);
  CHECK(std::vector<double>(zc.z(1).begin(), zc.z(1).end()) == z1);
}

TEST_CASE("free spins are fair coins") {
  auto lat = make_lattice(16, 16, 0.0);
  auto part = color_lattice(lat);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, 8, 1);
  double mag = 0.0;
  const int sweeps = 100000;
  for (int s = 0; s < sweeps; ++s) {
    gibbs_sweep(0.0, part, u);
    double m = 0.0;
    for (int c = 0; c < 2; ++c) {
      for (std::size_t p = 0; p < part.count(c); ++p) m += part.packed_s[c][p];
    }
    mag += m / 256.0;
  }
  CHECK(std::fabs(mag / sweeps) < 0.01);
}

TEST_CASE("small lattices match exact enumeration") {
  auto l22 = random_lattice(2, 2, 0.4, 0.6, 9);
  CHECK(tv_after(l22, 200000, false, 1) < 0.02);
  CHECK(tv_after(l22, 200000, true, 1) < 0.02);
  auto l33 = random_lattice(3, 3, 0.3, 0.5, 10);
  CHECK(tv_after(l33, 300000, false, 2) < 0.05);
}

TEST_CASE("energy of the stationary law") {
  auto lat = make_lattice(2, 2, 1.0);
  lat.b = {1.0, 0.0, 0.0, -1.0};
  // field 1 - (-1)... all up: field = 0, 4 edges * 1
  CHECK(log_weight(lat) == doctest::Approx(0.5 * 0.0 + 0.5 * 4.0));
  lat.s = {1, -1, -1, 1};
  CHECK(log_weight(lat) == doctest::Approx(0.5 * 0.0 + 0.5 * -4.0));
  CHECK(ising_energy(lat) == -log_weight(lat));
}

TEST_CASE("denoising") {
  const auto clean = synthetic_image(128, 128);
  SUBCASE("10% noise drops well below the input error") {
    const auto noisy = add_flip_noise(clean, 0.1, 3);
    CHECK(error_rate(noisy, clean) == doctest::Approx(0.1).epsilon(0.05));
    DenoiseConfig cfg;
    cfg.seed = 4;
    const auto full = denoise(noisy, cfg);
    cfg.diff_update = true;
    const auto diff = denoise(noisy, cfg);
    CHECK(full.image.px == diff.image.px);
    CHECK(full.flip_rate == diff.flip_rate);
    CHECK(error_rate(full.image, clean) < 0.1);
    CHECK(error_rate(full.image, clean) < 0.03);
    double late = 0.0;
    for (std::size_t i = cfg.burnin; i < full.flip_rate.size(); ++i) late += full.flip_rate[i];
    CHECK(late / static_cast<double>(full.flip_rate.size() - cfg.burnin) < 0.25);
  }
  SUBCASE("all-ones image") {
    BinaryImage ones{64, 64, std::vector<std::uint8_t>(64 * 64, 1)};
    const auto noisy = add_flip_noise(ones, 0.1, 5);
    CHECK(error_rate(denoise(noisy, {}).image, ones) < 0.01);
  }
  SUBCASE("noise-free input with strong bias is unchanged") {
    DenoiseConfig cfg;
    cfg.bias_scale = 8.0;
    CHECK(denoise(clean, cfg).image.px == clean.px);
  }
  SUBCASE("zero sweeps returns the input") {
    DenoiseConfig cfg;
    cfg.sweeps = 0;
    const auto noisy = add_flip_noise(clean, 0.2, 6);
    CHECK(denoise(noisy, cfg).image.px == noisy.px);
  }
  SUBCASE("empty image") {
    CHECK_THROWS_AS(denoise(BinaryImage{}, {}), InputError);
  }
}

TEST_CASE("pbm io") {
  const auto img = add_flip_noise(synthetic_image(13, 21), 0.3, 1);
  for (bool raw : {false, true}) {
    std::stringstream ss;
    write_pbm(ss, img, raw);
    const auto back = read_pbm(ss);
    CHECK(back.width == 21);
    CHECK(back.height == 13);
    CHECK(back.px == img.px);
  }
  std::istringstream compact("P1\n# c\n3 2\n101\n010\n");
  const auto c = read_pbm(compact);
  CHECK(c.px == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0});
  std::istringstream bad1("P2\n1 1\n0\n"), bad2("P1\n2 2\n1 0 1\n"), bad3("P4\n9 2\n\x01");
  CHECK_THROWS_AS(read_pbm(bad1), InputError);
  CHECK_THROWS_AS(read_pbm(bad2), InputError);
  CHECK_THROWS_AS(read_pbm(bad3), InputError);
  CHECK_THROWS_AS(read_pbm_file("/nonexistent.pbm"), InputError);
}

}  // TEST_SUITE
