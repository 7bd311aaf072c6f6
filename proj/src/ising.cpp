#include "mcmcperf/ising.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "mcmcperf/parallel.hpp"
#include "mcmcperf/simd/dispatch.hpp"

namespace mcmcperf::ising {

void IsingLattice::validate() const {
  if (height == 0 || width == 0) throw InputError("lattice must be non-empty");
  if (s.size() != size() || b.size() != size()) throw InputError("lattice arrays do not match its shape");
  for (auto v : s) {
    if (v != 1 && v != -1) throw InputError("spins must be +1 or -1");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw InputError("bias must be finite");
  }
  if (!std::isfinite(w)) throw InputError("coupling must be finite");
}

IsingLattice make_lattice(std::size_t height, std::size_t width, double w) {
  IsingLattice lat{height, width, std::vector<std::int8_t>(height * width, 1),
                   std::vector<double>(height * width, 0.0), w};
  lat.validate();
  return lat;
}

ColorPartition color_lattice(const IsingLattice& lat) {
  lat.validate();
  const std::size_t h = lat.height, wd = lat.width;
  ColorPartition part;
  part.color_of.resize(lat.size());
  part.slot_of.resize(lat.size());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < wd; ++j) {
      const std::size_t idx = lat.index(i, j);
      const int c = static_cast<int>((i + j) & 1);
      part.color_of[idx] = static_cast<std::uint8_t>(c);
      part.slot_of[idx] = static_cast<std::uint32_t>(part.colors[c].size());
      part.colors[c].push_back(static_cast<std::uint32_t>(idx));
    }
  }
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    const auto pad = static_cast<std::uint32_t>(part.sentinel(o));
    auto& nb = part.packed_neighbor_idx[c];
    nb.assign(part.count(c) * kNeighborSlots, pad);
    for (std::size_t p = 0; p < part.count(c); ++p) {
      const std::size_t idx = part.colors[c][p];
      const std::size_t i = idx / wd, j = idx % wd;
      std::uint32_t* slot = nb.data() + p * kNeighborSlots;
      if (i > 0) slot[0] = part.slot_of[lat.index(i - 1, j)];
      if (i + 1 < h) slot[1] = part.slot_of[lat.index(i + 1, j)];
      if (j > 0) slot[2] = part.slot_of[lat.index(i, j - 1)];
      if (j + 1 < wd) slot[3] = part.slot_of[lat.index(i, j + 1)];
    }
  }
  pack(lat, part);
  return part;
}

void pack(const IsingLattice& lat, ColorPartition& part) {
  if (part.color_of.size() != lat.size()) throw InputError("partition does not match lattice");
  for (int c = 0; c < 2; ++c) {
    const std::size_t n = part.count(c);
    part.packed_s[c].assign(n + 1, 0.0);
    part.packed_b[c].assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      part.packed_s[c][p] = lat.s[part.colors[c][p]];
      part.packed_b[c][p] = lat.b[part.colors[c][p]];
    }
  }
}

void unpack(const ColorPartition& part, IsingLattice& lat) {
  if (part.color_of.size() != lat.size()) throw InputError("partition does not match lattice");
  for (int c = 0; c < 2; ++c) {
    for (std::size_t p = 0; p < part.count(c); ++p) {
      lat.s[part.colors[c][p]] = part.packed_s[c][p] > 0.0 ? 1 : -1;
    }
  }
}

std::size_t same_color_edges(const IsingLattice& lat, const ColorPartition& part) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < lat.height; ++i) {
    for (std::size_t j = 0; j < lat.width; ++j) {
      const auto c = part.color_of[lat.index(i, j)];
      if (i + 1 < lat.height && part.color_of[lat.index(i + 1, j)] == c) ++bad;
      if (j + 1 < lat.width && part.color_of[lat.index(i, j + 1)] == c) ++bad;
    }
  }
  return bad;
}

double conditional_prob(double z) {
  double p;
  simd::active().sigmoid(&z, &p, 1);
  return p;
}

double log_weight(const IsingLattice& lat) {
  double field = 0.0, pair = 0.0;
  for (std::size_t i = 0; i < lat.height; ++i) {
    for (std::size_t j = 0; j < lat.width; ++j) {
      const std::size_t idx = lat.index(i, j);
      const double s = lat.s[idx];
      field += lat.b[idx] * s;
      if (i + 1 < lat.height) pair += s * lat.s[lat.index(i + 1, j)];
      if (j + 1 < lat.width) pair += s * lat.s[lat.index(i, j + 1)];
    }
  }
  return 0.5 * field + 0.5 * lat.w * pair;
}

double ising_energy(const IsingLattice& lat) { return -log_weight(lat); }

namespace {

thread_local std::vector<double> tl_u;
thread_local std::vector<double> tl_z;

inline double neighbor_sum(const double* other, const std::uint32_t* slot) {
  return other[slot[0]] + other[slot[1]] + other[slot[2]] + other[slot[3]];
}

void update_color(double w, ColorPartition& part, int c, const double* u, double* z,
                  std::size_t workers) {
  const auto& kr = simd::active();
  const int o = 1 - c;
  const std::size_t n = part.count(c);
  const double* other = part.packed_s[o].data();
  const double* b = part.packed_b[c].data();
  const std::uint32_t* nb = part.packed_neighbor_idx[c].data();
  double* s = part.packed_s[c].data();
  auto body = [&](std::size_t id) {
    const RowRange r = static_partition(n, workers, id);
    for (std::size_t p = r.begin; p < r.end; ++p) {
      z[p] = b[p] + w * neighbor_sum(other, nb + p * kNeighborSlots);
    }
    kr.spin_threshold(z + r.begin, u + r.begin, s + r.begin, r.size());
  };
  if (workers == 1) {
    body(0);
  } else {
    parallel_region(workers, body);
  }
}

}  // namespace

void gibbs_sweep(double w, ColorPartition& part, rng::DeviateBuffer& u, std::size_t workers) {
  if (workers == 0 || workers > kMaxWorkers) throw InputError("workers out of range");
  const std::size_t n0 = part.count(0), n = n0 + part.count(1);
  if (tl_u.size() < n) tl_u.resize(n);
  if (tl_z.size() < n) tl_z.resize(n);
  u.take(std::span<double>(tl_u.data(), n));
  update_color(w, part, 0, tl_u.data(), tl_z.data(), workers);
  update_color(w, part, 1, tl_u.data() + n0, tl_z.data(), workers);
}

void gibbs_sweep_ordered(double w, ColorPartition& part, rng::DeviateBuffer& u,
                         std::span<const std::uint32_t> order0,
                         std::span<const std::uint32_t> order1) {
  const std::size_t n0 = part.count(0), n = n0 + part.count(1);
  if (order0.size() != n0 || order1.size() != part.count(1)) {
    throw InputError("update orders must cover each colour exactly");
  }
  std::vector<double> uu(n);
  u.take(uu);
  const auto& kr = simd::active();
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    const auto order = c == 0 ? order0 : order1;
    const double* ub = uu.data() + (c == 0 ? 0 : n0);
    for (std::uint32_t p : order) {
      if (p >= part.count(c)) throw InputError("update order index out of range");
      const double z = part.packed_b[c][p] +
                       w * neighbor_sum(part.packed_s[o].data(),
                                        part.packed_neighbor_idx[c].data() + p * kNeighborSlots);
      kr.spin_threshold(&z, ub + p, part.packed_s[c].data() + p, 1);
    }
  }
}

// --- Differential path ------------------------------------------------------------

ZCache::ZCache(double w, const ColorPartition& part) : w_(w) {
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    const std::size_t n = part.count(c);
    nsum_[c].resize(n);
    z_[c].resize(n);
    p_[c].resize(n);
    dirty_[c].assign(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
      nsum_[c][p] = neighbor_sum(part.packed_s[o].data(),
                                 part.packed_neighbor_idx[c].data() + p * kNeighborSlots);
      z_[c][p] = part.packed_b[c][p] + w_ * nsum_[c][p];
    }
    simd::active().sigmoid(z_[c].data(), p_[c].data(), n);
  }
}

double ZCache::max_drift(const ColorPartition& part) const {
  double worst = 0.0;
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    for (std::size_t p = 0; p < part.count(c); ++p) {
      const double fresh = part.packed_b[c][p] +
                           w_ * neighbor_sum(part.packed_s[o].data(),
                                             part.packed_neighbor_idx[c].data() + p * kNeighborSlots);
      worst = std::max(worst, std::fabs(fresh - z_[c][p]));
    }
  }
  return worst;
}

void gibbs_sweep_diff(ColorPartition& part, ZCache& zc, rng::DeviateBuffer& u) {
  const auto& kr = simd::active();
  const std::size_t n0 = part.count(0), n = n0 + part.count(1);
  if (zc.nsum_[0].size() != n0 || zc.nsum_[1].size() != part.count(1)) {
    throw InputError("z cache does not match partition");
  }
  zc.u_.resize(n);
  u.take(zc.u_);
  std::uint64_t flips = 0;
  for (int c = 0; c < 2; ++c) {
    const int o = 1 - c;
    const std::size_t nc = part.count(c);
    const double* ub = zc.u_.data() + (c == 0 ? 0 : n0);

    // Refresh cached probabilities whose z moved since they were computed.
    auto& dl = zc.dirty_list_[c];
    if (!dl.empty()) {
      zc.scratch_z_.resize(dl.size());
      zc.scratch_p_.resize(dl.size());
      for (std::size_t i = 0; i < dl.size(); ++i) zc.scratch_z_[i] = zc.z_[c][dl[i]];
      kr.sigmoid(zc.scratch_z_.data(), zc.scratch_p_.data(), dl.size());
      for (std::size_t i = 0; i < dl.size(); ++i) {
        zc.p_[c][dl[i]] = zc.scratch_p_[i];
        zc.dirty_[c][dl[i]] = 0;
      }
      dl.clear();
    }

    double* s = part.packed_s[c].data();
    const double* p = zc.p_[c].data();
    const std::uint32_t* nb = part.packed_neighbor_idx[c].data();
    const std::size_t pad = part.sentinel(o);
    for (std::size_t i = 0; i < nc; ++i) {
      const double sn = ub[i] < p[i] ? 1.0 : -1.0;
      if (sn == s[i]) continue;
      s[i] = sn;
      ++flips;
      for (std::size_t q = 0; q < kNeighborSlots; ++q) {
        const std::uint32_t j = nb[i * kNeighborSlots + q];
        if (j == pad) continue;
        zc.nsum_[o][j] += 2.0 * sn;
        zc.z_[o][j] = part.packed_b[o][j] + zc.w_ * zc.nsum_[o][j];
        if (!zc.dirty_[o][j]) {
          zc.dirty_[o][j] = 1;
          zc.dirty_list_[o].push_back(j);
        }
      }
    }
  }
  zc.last_flips_ = flips;
  zc.total_flips_ += flips;
  ++zc.sweeps_;
}

// --- Denoising --------------------------------------------------------------------

DenoiseResult denoise(const BinaryImage& noisy, const DenoiseConfig& cfg) {
  if (noisy.height == 0 || noisy.width == 0) throw InputError("denoise: empty image");
  if (noisy.px.size() != noisy.height * noisy.width) throw InputError("denoise: image size mismatch");
  IsingLattice lat = make_lattice(noisy.height, noisy.width, cfg.w);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.s[i] = noisy.px[i] ? 1 : -1;
    lat.b[i] = cfg.bias_scale * lat.s[i];
  }
  lat.validate();
  ColorPartition part = color_lattice(lat);
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, cfg.seed, rng::derive_stream(cfg.seed, 0x15));
  std::optional<ZCache> zc;
  if (cfg.diff_update) zc.emplace(cfg.w, part);

  std::array<std::vector<double>, 2> acc{std::vector<double>(part.count(0), 0.0),
                                         std::vector<double>(part.count(1), 0.0)};
  std::array<std::vector<double>, 2> before;
  DenoiseResult out;
  const double n = static_cast<double>(lat.size());
  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    if (zc) {
      gibbs_sweep_diff(part, *zc, u);
      out.flip_rate.push_back(static_cast<double>(zc->last_flips()) / n);
    } else {
      before = part.packed_s;
      gibbs_sweep(cfg.w, part, u, cfg.workers);
      std::size_t flips = 0;
      for (int c = 0; c < 2; ++c) {
        for (std::size_t p = 0; p < part.count(c); ++p) flips += before[c][p] != part.packed_s[c][p];
      }
      out.flip_rate.push_back(static_cast<double>(flips) / n);
    }
    if (sweep >= cfg.burnin) {
      for (int c = 0; c < 2; ++c) {
        for (std::size_t p = 0; p < part.count(c); ++p) acc[c][p] += part.packed_s[c][p];
      }
    }
  }

  out.image = noisy;
  if (cfg.sweeps > cfg.burnin) {
    for (int c = 0; c < 2; ++c) {
      for (std::size_t p = 0; p < part.count(c); ++p) out.image.px[part.colors[c][p]] = acc[c][p] >= 0.0 ? 1 : 0;
    }
  }
  return out;
}

BinaryImage synthetic_image(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw InputError("image must be non-empty");
  BinaryImage img{height, width, std::vector<std::uint8_t>(height * width, 0)};
  const double ci = 0.5 * static_cast<double>(height), cj = 0.5 * static_cast<double>(width);
  const double r = 0.3 * static_cast<double>(std::min(height, width));
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const double di = static_cast<double>(i) + 0.5 - ci, dj = static_cast<double>(j) + 0.5 - cj;
      img.px[i * width + j] = di * di + dj * dj <= r * r ? 1 : 0;
    }
  }
  return img;
}

BinaryImage add_flip_noise(const BinaryImage& img, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InputError("noise rate must be in [0, 1]");
  rng::DeviateBuffer u(rng::DeviateKind::Uniform01, seed, rng::derive_stream(seed, 0x5e));
  BinaryImage out = img;
  for (auto& p : out.px) {
    if (u.next() < rate) p ^= 1;
  }
  return out;
}

double error_rate(const BinaryImage& a, const BinaryImage& b) {
  if (a.height != b.height || a.width != b.width || a.px.size() != b.px.size()) {
    throw InputError("images differ in size");
  }
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.px.size(); ++i) diff += a.px[i] != b.px[i];
  return a.px.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(a.px.size());
}

}  // namespace mcmcperf::ising
