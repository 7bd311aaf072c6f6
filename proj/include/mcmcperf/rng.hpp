#pragma once
// Batch random-number generation.
//
// Stream contract: a stream is (seed, stream id). Uniform deviate i of a
// stream comes from Philox4x32-10 block i/2 (counter = {i/2, stream id},
// key = seed), half i%2, mapped onto the odd multiples of 2^-53 in (0, 1).
// Normal deviate i is Box-Muller on uniform pair i/2 of the derived stream
// normal_stream(stream id): cosine branch for even i, sine branch for odd i.
// A DeviateBuffer consumes that sequence in order whatever its capacity, and
// the one-at-a-time sources below produce exactly the same sequence.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcmcperf/error.hpp"

namespace mcmcperf::rng {

enum class DeviateKind { Uniform01, StdNormal };

inline constexpr std::size_t kDefaultCapacity = 8192;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);
/// Independent child stream id, e.g. one per chain, group or worker.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index);
/// Stream actually fed to Philox for normal deviates of `stream`.
std::uint64_t normal_stream(std::uint64_t stream);

class DeviateBuffer {
 public:
  DeviateBuffer(DeviateKind kind, std::uint64_t seed, std::uint64_t stream,
                std::size_t capacity = kDefaultCapacity);

  double next() {
    if (cursor_ == data_.size()) refill();
    ++consumed_;
    return data_[cursor_++];
  }

  /// Copies the next out.size() deviates, refilling as often as needed.
  void take(std::span<double> out);

  /// Regenerates the whole block from the current stream position. Unread
  /// deviates in the old block are dropped (and counted as waste).
  void refill();

  DeviateKind kind() const { return kind_; }
  std::size_t capacity() const { return data_.size(); }
  std::size_t cursor() const { return cursor_; }
  std::uint64_t refills() const { return refills_; }
  std::uint64_t generated() const { return refills_ * data_.size(); }
  std::uint64_t consumed() const { return consumed_; }
  /// (generated - consumed) / generated; 0 before the first refill.
  double waste_fraction() const;

 private:
  DeviateKind kind_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::vector<double> data_;
  std::vector<double> scratch_u_;
  std::vector<double> scratch_z_;
  std::size_t cursor_;
  std::uint64_t refills_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t next_index_ = 0;
};

/// Scalar, one deviate per call. Same stream contract as DeviateBuffer.
class OneAtATimeUniform {
 public:
  OneAtATimeUniform(std::uint64_t seed, std::uint64_t stream);
  double next();
  std::uint64_t consumed() const { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  double pending_ = 0.0;
};

class OneAtATimeNormal {
 public:
  OneAtATimeNormal(std::uint64_t seed, std::uint64_t stream);
  double next();
  std::uint64_t consumed() const { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  double pending_ = 0.0;
};

template <class S>
concept DeviateSource = requires(S& s) {
  { s.next() } -> std::convertible_to<double>;
};

struct GammaParams {
  double alpha = 1.0;  // shape
  double rate = 1.0;
};

inline constexpr int kGammaMaxIterations = 10000;

/// Marsaglia-Tsang squeeze/rejection for shape >= 1; shape < 1 draws
/// Gamma(shape + 1) and multiplies by U^(1/shape). Normals come from `normals`,
/// uniforms from `uniforms`.
template <DeviateSource U, DeviateSource N>
double gamma_sample(const GammaParams& p, U& uniforms, N& normals) {
  if (!(p.alpha > 0.0) || !(p.rate > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.rate)) {
    throw InputError("gamma_sample: shape and rate must be positive and finite");
  }
  const double a = p.alpha < 1.0 ? p.alpha + 1.0 : p.alpha;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double v = 0.0;
  int iter = 0;
  for (;; ++iter) {
    if (iter >= kGammaMaxIterations) {
      throw SamplerError("gamma_sample: rejection loop exceeded iteration cap");
    }
    const double x = normals.next();
    v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniforms.next();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) break;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) break;
  }
  double g = d * v;
  if (p.alpha < 1.0) g *= std::pow(uniforms.next(), 1.0 / p.alpha);
  return g / p.rate;
}

/// y_i ~ Gamma(alpha_i, 1), x_i = y_i / sum(y). If every y_i underflows to
/// zero the draw is repeated once before giving up with SamplerError.
template <DeviateSource U, DeviateSource N>
void dirichlet_sample(std::span<const double> alphas, U& uniforms, N& normals,
                      std::span<double> out) {
  if (alphas.empty() || out.size() != alphas.size()) {
    throw InputError("dirichlet_sample: need K >= 1 and matching output length");
  }
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InputError("dirichlet_sample: alphas must be positive");
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      out[i] = gamma_sample(GammaParams{alphas[i], 1.0}, uniforms, normals);
      sum += out[i];
    }
    if (sum > 0.0) {
      for (double& x : out) x /= sum;
      return;
    }
  }
  throw SamplerError("dirichlet_sample: all gamma components underflowed twice");
}

template <DeviateSource U, DeviateSource N>
std::vector<double> dirichlet_sample(std::span<const double> alphas, U& uniforms, N& normals) {
  std::vector<double> out(alphas.size());
  dirichlet_sample(alphas, uniforms, normals, std::span<double>(out));
  return out;
}

// --- Benchmark ---------------------------------------------------------------

enum class Dist { Uniform, Normal, Gamma, Dirichlet };
enum class GenMode { OneAtATime, Batch };

std::string_view to_string(Dist d);
std::string_view to_string(GenMode m);
Dist parse_dist(std::string_view s);
GenMode parse_mode(std::string_view s);

struct RngBenchRecord {
  Dist dist;
  GenMode mode;
  std::uint64_t n = 0;            // samples (gamma samples for Dirichlet)
  double cycles_per_sample = 0.0;
  double waste_fraction = 0.0;
  double wall_seconds = 0.0;
};

struct RngBenchConfig {
  std::uint64_t seed = 42;
  double clock_ghz = 2.6;           // nominal clock for the cycle conversion
  std::size_t capacity = kDefaultCapacity;
  GammaParams gamma{2.0, 3.0};
  std::size_t dirichlet_k = 100;
  double dirichlet_alpha = 0.5;
};

/// Times n samples written to a destination array. n must be >= 1e5.
RngBenchRecord rng_bench(Dist dist, GenMode mode, std::uint64_t n,
                         const RngBenchConfig& cfg = {});

/// CSV header and row: dist,mode,n,cycles_per_sample,waste_fraction
std::string rng_bench_csv_header();
std::string to_csv_row(const RngBenchRecord& r);

}  // namespace mcmcperf::rng
