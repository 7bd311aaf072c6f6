#include "mcmcperf/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>

#include "mcmcperf/simd/dispatch.hpp"

namespace mcmcperf::rng {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t normal_stream(std::uint64_t stream) { return derive_stream(stream, 0x4e4f524d414cULL); }

// --- DeviateBuffer -------------------------------------------------------------

DeviateBuffer::DeviateBuffer(DeviateKind kind, std::uint64_t seed, std::uint64_t stream,
                             std::size_t capacity)
    : kind_(kind),
      seed_(seed),
      stream_(kind == DeviateKind::StdNormal ? normal_stream(stream) : stream),
      data_(capacity),
      cursor_(capacity) {
  if (capacity == 0) throw InputError("DeviateBuffer: capacity must be >= 1");
}

void DeviateBuffer::refill() {
  const auto& k = simd::active();
  const std::size_t cap = data_.size();
  const std::uint64_t start = next_index_;
  if (kind_ == DeviateKind::Uniform01) {
    k.philox_uniform(seed_, stream_, start, data_.data(), cap);
  } else {
    // Box-Muller works on whole pairs; an odd start or end generates one
    // extra value that is dropped, so deviate i is the same for any capacity.
    const std::uint64_t first_pair = start / 2;
    const std::uint64_t last_pair = (start + cap - 1) / 2;
    const std::size_t pairs = static_cast<std::size_t>(last_pair - first_pair + 1);
    scratch_u_.resize(2 * pairs);
    k.philox_uniform(seed_, stream_, 2 * first_pair, scratch_u_.data(), 2 * pairs);
    if (start % 2 == 0 && cap % 2 == 0) {
      k.box_muller(scratch_u_.data(), data_.data(), pairs);
    } else {
      scratch_z_.resize(2 * pairs);
      k.box_muller(scratch_u_.data(), scratch_z_.data(), pairs);
      const std::size_t skip = static_cast<std::size_t>(start - 2 * first_pair);
      std::copy_n(scratch_z_.begin() + static_cast<std::ptrdiff_t>(skip), cap, data_.begin());
    }
  }
  next_index_ += cap;
  cursor_ = 0;
  ++refills_;
}

void DeviateBuffer::take(std::span<double> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (cursor_ == data_.size()) refill();
    const std::size_t n = std::min(out.size() - done, data_.size() - cursor_);
    std::memcpy(out.data() + done, data_.data() + cursor_, n * sizeof(double));
    cursor_ += n;
    done += n;
  }
  consumed_ += out.size();
}

double DeviateBuffer::waste_fraction() const {
  const std::uint64_t gen = generated();
  if (gen == 0) return 0.0;
  return static_cast<double>(gen - consumed_) / static_cast<double>(gen);
}

// --- One-at-a-time sources -------------------------------------------------------

OneAtATimeUniform::OneAtATimeUniform(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {}

double OneAtATimeUniform::next() {
  const std::uint64_t i = index_++;
  if (i & 1) return pending_;
  double pair[2];
  simd::scalar_kernels().philox_uniform(seed_, stream_, i, pair, 2);
  pending_ = pair[1];
  return pair[0];
}

OneAtATimeNormal::OneAtATimeNormal(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(normal_stream(stream)) {}

double OneAtATimeNormal::next() {
  const std::uint64_t i = index_++;
  if (i & 1) return pending_;
  const auto& k = simd::scalar_kernels();
  double u[2], z[2];
  k.philox_uniform(seed_, stream_, i, u, 2);
  k.box_muller(u, z, 1);
  pending_ = z[1];
  return z[0];
}

// --- Benchmark -----------------------------------------------------------------

std::string_view to_string(Dist d) {
  switch (d) {
    case Dist::Uniform: return "uniform";
    case Dist::Normal: return "normal";
    case Dist::Gamma: return "gamma";
    case Dist::Dirichlet: return "dirichlet";
  }
  return "?";
}

std::string_view to_string(GenMode m) {
  return m == GenMode::Batch ? "batch" : "one-at-a-time";
}

Dist parse_dist(std::string_view s) {
  if (s == "uniform") return Dist::Uniform;
  if (s == "normal") return Dist::Normal;
  if (s == "gamma") return Dist::Gamma;
  if (s == "dirichlet") return Dist::Dirichlet;
  throw InputError("unknown distribution '" + std::string(s) + "'");
}

GenMode parse_mode(std::string_view s) {
  if (s == "batch") return GenMode::Batch;
  if (s == "one-at-a-time" || s == "oaat" || s == "single") return GenMode::OneAtATime;
  throw InputError("unknown generation mode '" + std::string(s) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

template <class U, class N>
void fill_gamma(const RngBenchConfig& cfg, std::span<double> out, U& u, N& n) {
  for (double& v : out) v = gamma_sample(cfg.gamma, u, n);
}

template <class U, class N>
void fill_dirichlet(const RngBenchConfig& cfg, std::span<double> out, U& u, N& n) {
  const std::vector<double> alphas(cfg.dirichlet_k, cfg.dirichlet_alpha);
  std::size_t i = 0;
  for (; i + cfg.dirichlet_k <= out.size(); i += cfg.dirichlet_k) {
    dirichlet_sample(alphas, u, n, out.subspan(i, cfg.dirichlet_k));
  }
}

double waste_of(const DeviateBuffer& a, const DeviateBuffer& b) {
  const double gen = static_cast<double>(a.generated() + b.generated());
  if (gen == 0.0) return 0.0;
  return (gen - static_cast<double>(a.consumed() + b.consumed())) / gen;
}

}  // namespace

RngBenchRecord rng_bench(Dist dist, GenMode mode, std::uint64_t n, const RngBenchConfig& cfg) {
  if (n < 100000) throw InputError("rng_bench: n must be at least 1e5");
  if (!(cfg.clock_ghz > 0.0)) throw InputError("rng_bench: clock_ghz must be positive");
  if (dist == Dist::Dirichlet && cfg.dirichlet_k == 0) throw InputError("rng_bench: dirichlet_k must be >= 1");

  std::uint64_t count = n;
  if (dist == Dist::Dirichlet) count = (n / cfg.dirichlet_k) * cfg.dirichlet_k;
  std::vector<double> out(count);
  const std::uint64_t us = derive_stream(0, 1);
  const std::uint64_t ns = derive_stream(0, 2);

  RngBenchRecord rec{dist, mode, count, 0.0, 0.0, 0.0};
  const auto t0 = Clock::now();
  if (mode == GenMode::Batch) {
    DeviateBuffer ub(DeviateKind::Uniform01, cfg.seed, us, cfg.capacity);
    DeviateBuffer nb(DeviateKind::StdNormal, cfg.seed, ns, cfg.capacity);
    switch (dist) {
      case Dist::Uniform: ub.take(out); break;
      case Dist::Normal: nb.take(out); break;
      case Dist::Gamma: fill_gamma(cfg, out, ub, nb); break;
      case Dist::Dirichlet: fill_dirichlet(cfg, out, ub, nb); break;
    }
    rec.waste_fraction = waste_of(ub, nb);
  } else {
    OneAtATimeUniform uo(cfg.seed, us);
    OneAtATimeNormal no(cfg.seed, ns);
    switch (dist) {
      case Dist::Uniform:
        for (double& v : out) v = uo.next();
        break;
      case Dist::Normal:
        for (double& v : out) v = no.next();
        break;
      case Dist::Gamma: fill_gamma(cfg, out, uo, no); break;
      case Dist::Dirichlet: fill_dirichlet(cfg, out, uo, no); break;
    }
    rec.waste_fraction = 0.0;
  }
  const auto t1 = Clock::now();
  // Keep the destination observable.
  volatile double sink = out.empty() ? 0.0 : out[out.size() / 2];
  (void)sink;

  rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  rec.cycles_per_sample = cfg.clock_ghz * 1e9 * rec.wall_seconds / static_cast<double>(count);
  return rec;
}

std::string rng_bench_csv_header() { return "dist,mode,n,cycles_per_sample,waste_fraction"; }

std::string to_csv_row(const RngBenchRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.6g,%.6g", std::string(to_string(r.dist)).c_str(),
                std::string(to_string(r.mode)).c_str(), static_cast<unsigned long long>(r.n),
                r.cycles_per_sample, r.waste_fraction);
  return buf;
}

}  // namespace mcmcperf::rng
