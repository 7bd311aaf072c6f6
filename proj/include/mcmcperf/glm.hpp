#pragma once
// Logistic-regression log-likelihood and gradient under interchangeable
// execution strategies, plus the differential-update fast path.
//
//   L(beta) = -sum_n [ (1 - y_n) x_n.beta + log(1 + exp(-x_n.beta)) ]
//   g       = X^T g_f,  g_f[n] = y_n - 1 / (1 + exp(-x_n.beta))

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcmcperf/error.hpp"

namespace mcmcperf::glm {

class ShardedMatrix;

/// Row-major N x K covariates plus a 0/1 response. Immutable once built.
class DesignMatrix {
 public:
  DesignMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> x,
               std::vector<double> y);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::span<const double> row(std::size_t n) const {
    return std::span<const double>(x_).subspan(n * n_cols_, n_cols_);
  }
  double at(std::size_t n, std::size_t k) const { return x_[n * n_cols_ + k]; }

  /// Per-shard copies for the sharded strategy. Built on first use for a
  /// given shard count and shared by every copy of this matrix afterwards.
  std::shared_ptr<const ShardedMatrix> shards(std::size_t n_shards) const;

 private:
  struct ShardCache;

  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::shared_ptr<ShardCache> cache_;
};

struct Shard {
  std::vector<double> x;  // rows() * n_cols, row-major, own allocation
  std::vector<double> y;
  std::size_t row_offset = 0;
  std::size_t rows() const { return y.size(); }
};

/// Contiguous row blocks of a DesignMatrix, each copied into its own
/// allocation. Shard sizes differ by at most one row, larger shards first.
class ShardedMatrix {
 public:
  ShardedMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Shard> shards);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t n_shards() const { return shards_.size(); }
  const Shard& shard(std::size_t s) const { return shards_[s]; }
  std::span<const Shard> shards() const { return shards_; }

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<Shard> shards_;
};

ShardedMatrix make_sharded(const DesignMatrix& data, std::size_t n_shards);

enum class Strategy { Som, Mos, Plf, PlfChunked, Sharded };

std::string_view to_string(Strategy s);
/// Accepts som, mos, plf, plf-chunked (or plfchunked), sharded.
Strategy parse_strategy(std::string_view name);

struct ExecPlan {
  Strategy strategy = Strategy::Plf;
  std::size_t workers = 1;
  std::size_t n_chunks = 1;  // PlfChunked and Sharded: chunks per worker block
  std::size_t n_shards = 2;  // Sharded: clamped to min(workers, N)
};

void validate(const ExecPlan& plan);

struct GradResult {
  double f = 0.0;
  std::vector<double> g;
};

double loglike(const DesignMatrix& data, std::span<const double> beta, const ExecPlan& plan);
double loglike(const ShardedMatrix& data, std::span<const double> beta, const ExecPlan& plan);

GradResult loglike_grad(const DesignMatrix& data, std::span<const double> beta,
                        const ExecPlan& plan);
GradResult loglike_grad(const ShardedMatrix& data, std::span<const double> beta,
                        const ExecPlan& plan);

/// Maintained X.beta for coordinate-wise updates. `xt` is the column-major
/// copy of X (column k at offset k*N), built when the workspace is created.
class GlmWorkspace {
 public:
  GlmWorkspace(const DesignMatrix& data, std::span<const double> beta,
               bool with_transpose = true);

  std::span<const double> xbeta() const { return xbeta_; }
  std::span<const double> beta() const { return beta_; }
  bool has_transpose() const { return !xt_.empty(); }
  std::span<const double> column(std::size_t k) const;
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }

  /// max_n |xbeta[n] - x_n.beta| against a fresh sequential recompute.
  double max_drift(const DesignMatrix& data) const;
  /// Recomputes xbeta from scratch.
  void refresh(const DesignMatrix& data);

 private:
  friend void commit_update(GlmWorkspace& ws, std::size_t k, double delta_beta_k,
                            const ExecPlan& plan);

  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<double> xbeta_;
  std::vector<double> xt_;
  std::vector<double> beta_;
};

/// L(beta') with beta'_k = beta_k + delta, using only column k. Does not
/// modify the workspace.
double diff_loglike(const GlmWorkspace& ws, const DesignMatrix& data, std::size_t k,
                    double delta_beta_k, const ExecPlan& plan);

/// xbeta += delta * X_k; beta_k += delta.
void commit_update(GlmWorkspace& ws, std::size_t k, double delta_beta_k, const ExecPlan& plan);

// Floating-point operation accounting. Costs are charged per kernel call from
// the analytic per-row counts below; transcendental calls count as one op.
inline constexpr std::uint64_t kTrRowFlops = 6;      // exp, log1p, 4 arithmetic
inline constexpr std::uint64_t kTrGradRowFlops = 9;  // + divide, subtract, select
inline constexpr std::uint64_t kShiftRowFlops = 2;   // t + delta * x_k

std::uint64_t flop_count();
void reset_flop_count();

// --- Data sources ------------------------------------------------------------

struct SyntheticGlm {
  DesignMatrix data;
  std::vector<double> beta_true;
};

/// x_nk ~ N(0, 1), beta*_k ~ U(-1, 1), y_n ~ Bernoulli(sigmoid(x_n.beta*)).
SyntheticGlm synthetic_glm(std::size_t n_rows, std::size_t n_cols, std::uint64_t seed);
/// Same covariates and responses generated from a caller-supplied beta*.
SyntheticGlm synthetic_glm(std::size_t n_rows, std::span<const double> beta_true,
                           std::uint64_t seed);

/// K covariate columns followed by one 0/1 response column per line. A
/// leading all-text header line and '#' comment lines are skipped.
/// Throws InputError with the offending line and column.
DesignMatrix read_csv(std::istream& in, const std::string& source_name = "<stream>");
DesignMatrix read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const DesignMatrix& data);

}  // namespace mcmcperf::glm
