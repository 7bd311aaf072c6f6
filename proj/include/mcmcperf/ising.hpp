#pragma once
// Square-lattice Ising Gibbs sampler with free boundaries.
//
// Node i is +1 with probability 1/(1+exp(-z_i)), z_i = b_i + w * sum of the
// neighbouring spins. The stationary law of that conditional is
//   P(s) ~ exp(1/2 sum_i b_i s_i + 1/2 w sum_<ij> s_i s_j).
//
// Sampling runs on a checkerboard ColorPartition: nodes of one colour have no
// edges between them, so a colour is updated as one data-parallel step
// against the frozen other colour. The packed arrays are the live state
// while sampling; unpack() writes them back to the lattice.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcmcperf/error.hpp"
#include "mcmcperf/rng.hpp"

namespace mcmcperf::ising {

struct IsingLattice {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int8_t> s;  // row-major, +1 / -1
  std::vector<double> b;       // bias field
  double w = 0.0;              // uniform coupling

  std::size_t size() const { return height * width; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * width + j; }
  void validate() const;
};

/// All spins +1, zero bias.
IsingLattice make_lattice(std::size_t height, std::size_t width, double w);

/// Sentinel-padded neighbour lists: every node has 4 slots; a missing
/// neighbour points at the extra 0.0 entry at the end of the other colour's
/// packed spin array.
inline constexpr std::size_t kNeighborSlots = 4;

struct ColorPartition {
  std::array<std::vector<std::uint32_t>, 2> colors;  // lattice indices, ascending
  std::array<std::vector<double>, 2> packed_s;       // size n_c + 1, last = 0.0
  std::array<std::vector<double>, 2> packed_b;
  std::array<std::vector<std::uint32_t>, 2> packed_neighbor_idx;  // 4 per node, into the other colour
  std::vector<std::uint8_t> color_of;                // per lattice node
  std::vector<std::uint32_t> slot_of;                // packed position within its colour

  std::size_t count(int c) const { return colors[c].size(); }
  std::size_t sentinel(int c) const { return colors[c].size(); }
};

/// Node (i, j) gets colour (i + j) mod 2.
ColorPartition color_lattice(const IsingLattice& lat);
/// Copies lattice spins (and biases) into the packed arrays.
void pack(const IsingLattice& lat, ColorPartition& part);
/// Copies packed spins back into the lattice.
void unpack(const ColorPartition& part, IsingLattice& lat);
/// Number of lattice edges joining two nodes of the same colour.
std::size_t same_color_edges(const IsingLattice& lat, const ColorPartition& part);

/// 1/(1+exp(-z)), overflow-safe.
double conditional_prob(double z);

/// 1/2 sum b s + 1/2 w sum_<ij> s s, i.e. log P(s) up to the normaliser.
double log_weight(const IsingLattice& lat);
/// -log_weight
double ising_energy(const IsingLattice& lat);

/// One Gibbs sweep: colour 0 then colour 1. The sweep takes size() uniforms
/// from `u`; colour 0 node p uses deviate p, colour 1 node p uses n0 + p.
/// Each colour is split over `workers` (static partition).
void gibbs_sweep(double w, ColorPartition& part, rng::DeviateBuffer& u, std::size_t workers = 1);

/// Same update, nodes of each colour visited in the given orders (each a
/// permutation of that colour's packed indices). Deviate assignment is by
/// packed index, so the result does not depend on the orders.
void gibbs_sweep_ordered(double w, ColorPartition& part, rng::DeviateBuffer& u,
                         std::span<const std::uint32_t> order0,
                         std::span<const std::uint32_t> order1);

/// Differential-update state: neighbour spin sums, z = b + w * nsum and the
/// cached conditional probabilities, per colour in packed order.
class ZCache {
 public:
  ZCache(double w, const ColorPartition& part);

  std::span<const double> z(int c) const { return z_[c]; }
  std::span<const double> nsum(int c) const { return nsum_[c]; }
  double w() const { return w_; }
  std::uint64_t last_flips() const { return last_flips_; }
  std::uint64_t total_flips() const { return total_flips_; }
  std::uint64_t sweeps() const { return sweeps_; }
  /// max |z - fresh z| over all nodes.
  double max_drift(const ColorPartition& part) const;

 private:
  friend void gibbs_sweep_diff(ColorPartition& part, ZCache& zc, rng::DeviateBuffer& u);

  double w_;
  std::array<std::vector<double>, 2> nsum_;
  std::array<std::vector<double>, 2> z_;
  std::array<std::vector<double>, 2> p_;
  std::array<std::vector<std::uint8_t>, 2> dirty_;
  std::array<std::vector<std::uint32_t>, 2> dirty_list_;
  std::vector<double> scratch_z_, scratch_p_, u_;
  std::uint64_t last_flips_ = 0;
  std::uint64_t total_flips_ = 0;
  std::uint64_t sweeps_ = 0;
};

/// Same transition as gibbs_sweep (bit-identical states for the same
/// deviates); z and p are only recomputed around flipped spins.
void gibbs_sweep_diff(ColorPartition& part, ZCache& zc, rng::DeviateBuffer& u);

// --- Denoising ------------------------------------------------------------------

struct BinaryImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> px;  // row-major, 0 or 1

  std::uint8_t at(std::size_t i, std::size_t j) const { return px[i * width + j]; }
};

struct DenoiseConfig {
  double w = 1.0;
  double bias_scale = 2.0;
  std::size_t sweeps = 100;
  std::size_t burnin = 20;
  std::uint64_t seed = 1;
  bool diff_update = false;
  std::size_t workers = 1;
};

struct DenoiseResult {
  BinaryImage image;
  std::vector<double> flip_rate;  // per sweep, fraction of nodes that flipped
};

/// Pixel 1 maps to spin +1, 0 to -1; b_i = bias_scale * noisy spin, and the
/// chain starts at the noisy image. The restored pixel is the sign of the
/// post-burn-in mean spin (ties -> 1). With no retained sweeps the result
/// is the input.
DenoiseResult denoise(const BinaryImage& noisy, const DenoiseConfig& cfg);

/// A filled disc on an empty background.
BinaryImage synthetic_image(std::size_t height, std::size_t width);
/// Flips each pixel independently with probability `rate`.
BinaryImage add_flip_noise(const BinaryImage& img, double rate, std::uint64_t seed);
double error_rate(const BinaryImage& a, const BinaryImage& b);

/// Plain (P1) and raw (P4) PBM. Throws InputError on malformed input.
BinaryImage read_pbm(std::istream& in);
BinaryImage read_pbm_file(const std::string& path);
void write_pbm(std::ostream& out, const BinaryImage& img, bool raw = false);
void write_pbm_file(const std::string& path, const BinaryImage& img, bool raw = false);

}  // namespace mcmcperf::ising
