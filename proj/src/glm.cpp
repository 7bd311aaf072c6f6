#include "mcmcperf/glm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

#include "mcmcperf/parallel.hpp"
#include "mcmcperf/simd/dispatch.hpp"

namespace mcmcperf::glm {

namespace {

std::atomic<std::uint64_t> g_flops{0};

void charge(std::uint64_t n) { g_flops.fetch_add(n, std::memory_order_relaxed); }

// Reused per thread across evaluations.
thread_local std::vector<double> tl_xbeta;
thread_local std::vector<double> tl_gf;

double* scratch(std::vector<double>& v, std::size_t n) {
  if (v.size() < n) v.resize(n);
  return v.data();
}

void check_beta(std::size_t k, std::span<const double> beta) {
  if (beta.size() != k) {
    throw InputError("coefficient length " + std::to_string(beta.size()) +
                     " does not match K = " + std::to_string(k));
  }
  for (double b : beta) {
    if (!std::isfinite(b)) throw InputError("coefficients must be finite");
  }
}

// One contiguous row block, as seen by one worker.
struct Block {
  const double* x;
  const double* y;
  std::size_t rows;
};

struct Partial {
  double f = 0.0;
  std::vector<double> g;
};

// PLF body: LA map, TR map, and (for the gradient) the transposed LA map over
// the block, in `chunks` sequential pieces. The last piece absorbs the
// remainder; chunks is clamped to the row count.
void plf_block(const simd::Kernels& kr, const Block& b, std::size_t k,
               std::span<const double> beta, std::size_t chunks, bool grad, Partial& out) {
  if (b.rows == 0) return;
  chunks = std::clamp<std::size_t>(chunks, 1, b.rows);
  const std::size_t step = b.rows / chunks;
  const std::size_t max_rows = b.rows - step * (chunks - 1);
  double* xb = scratch(tl_xbeta, max_rows);
  double* gf = grad ? scratch(tl_gf, max_rows) : nullptr;
  double f = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t r0 = c * step;
    const std::size_t rows = c + 1 == chunks ? b.rows - r0 : step;
    const double* xc = b.x + r0 * k;
    kr.gemv_rows(xc, rows, k, beta.data(), xb);
    if (grad) {
      f += kr.loglike_grad_terms(xb, b.y + r0, rows, gf);
      kr.gemv_t_acc(xc, rows, k, gf, out.g.data());
    } else {
      f += kr.loglike_terms(xb, b.y + r0, rows);
    }
  }
  out.f += f;
  charge(b.rows * (2 * k + (grad ? kTrGradRowFlops + 2 * k : kTrRowFlops)));
}

// MOS body: one fused pass per row, with a per-row kernel call.
void mos_block(const simd::Kernels& kr, const Block& b, std::size_t k,
               std::span<const double> beta, bool grad, Partial& out) {
  double f = 0.0;
  for (std::size_t r = 0; r < b.rows; ++r) {
    const double* row = b.x + r * k;
    double t, gf;
    kr.gemv_rows(row, 1, k, beta.data(), &t);
    if (grad) {
      f += kr.loglike_grad_terms(&t, b.y + r, 1, &gf);
      kr.gemv_t_acc(row, 1, k, &gf, out.g.data());
    } else {
      f += kr.loglike_terms(&t, b.y + r, 1);
    }
  }
  out.f += f;
  charge(b.rows * (2 * k + (grad ? kTrGradRowFlops + 2 * k : kTrRowFlops)));
}

// Worker-private partials folded in ascending worker order.
GradResult merge(std::vector<Partial>& parts, std::size_t k, bool grad) {
  GradResult res;
  if (grad) res.g.assign(k, 0.0);
  for (auto& p : parts) {
    res.f += p.f;
    if (grad) {
      for (std::size_t j = 0; j < k; ++j) res.g[j] += p.g[j];
    }
  }
  count_merges(parts.size());
  return res;
}

std::vector<Partial> make_partials(std::size_t workers, std::size_t k, bool grad) {
  std::vector<Partial> parts(workers);
  if (grad) {
    for (auto& p : parts) p.g.assign(k, 0.0);
  }
  return parts;
}

GradResult eval_som(const DesignMatrix& d, std::span<const double> beta, const ExecPlan& plan,
                    bool grad) {
  const auto& kr = simd::active();
  const std::size_t n = d.n_rows(), k = d.n_cols(), w = plan.workers;
  std::vector<double> xbeta(n);
  std::vector<double> gf(grad ? n : 0);
  const double* x = d.x().data();
  const double* y = d.y().data();

  // LA map
  parallel_region(w, [&](std::size_t i) {
    const RowRange r = static_partition(n, w, i);
    kr.gemv_rows(x + r.begin * k, r.size(), k, beta.data(), xbeta.data() + r.begin);
  });
  // TR map + reduction
  auto parts = make_partials(w, k, grad);
  parallel_region(w, [&](std::size_t i) {
    const RowRange r = static_partition(n, w, i);
    if (grad) {
      parts[i].f = kr.loglike_grad_terms(xbeta.data() + r.begin, y + r.begin, r.size(),
                                         gf.data() + r.begin);
    } else {
      parts[i].f = kr.loglike_terms(xbeta.data() + r.begin, y + r.begin, r.size());
    }
  });
  // Second LA map, X^T g_f
  if (grad) {
    parallel_region(w, [&](std::size_t i) {
      const RowRange r = static_partition(n, w, i);
      kr.gemv_t_acc(x + r.begin * k, r.size(), k, gf.data() + r.begin, parts[i].g.data());
    });
  }
  charge(n * (2 * k + (grad ? kTrGradRowFlops + 2 * k : kTrRowFlops)));
  return merge(parts, k, grad);
}

GradResult eval_rows(const DesignMatrix& d, std::span<const double> beta, const ExecPlan& plan,
                     bool grad) {
  const auto& kr = simd::active();
  const std::size_t n = d.n_rows(), k = d.n_cols(), w = plan.workers;
  const double* x = d.x().data();
  const double* y = d.y().data();
  auto parts = make_partials(w, k, grad);
  parallel_region(w, [&](std::size_t i) {
    const RowRange r = static_partition(n, w, i);
    const Block b{x + r.begin * k, y + r.begin, r.size()};
    switch (plan.strategy) {
      case Strategy::Mos: mos_block(kr, b, k, beta, grad, parts[i]); break;
      case Strategy::Plf: plf_block(kr, b, k, beta, 1, grad, parts[i]); break;
      default: plf_block(kr, b, k, beta, plan.n_chunks, grad, parts[i]); break;
    }
  });
  return merge(parts, k, grad);
}

GradResult eval_sharded(const ShardedMatrix& d, std::span<const double> beta,
                        const ExecPlan& plan, bool grad) {
  const auto& kr = simd::active();
  const std::size_t k = d.n_cols(), w = plan.workers, s_count = d.n_shards();
  if (s_count > w) {
    throw InputError("sharded evaluation needs at least one worker per shard (" +
                     std::to_string(s_count) + " shards, " + std::to_string(w) + " workers)");
  }
  // Stable worker -> shard map: shard s owns a contiguous run of workers.
  std::vector<std::size_t> shard_of(w), local(w), team(w);
  for (std::size_t s = 0; s < s_count; ++s) {
    const RowRange wr = static_partition(w, s_count, s);
    for (std::size_t i = wr.begin; i < wr.end; ++i) {
      shard_of[i] = s;
      local[i] = i - wr.begin;
      team[i] = wr.size();
    }
  }
  auto parts = make_partials(w, k, grad);
  parallel_region(w, [&](std::size_t i) {
    const Shard& sh = d.shard(shard_of[i]);
    const RowRange r = static_partition(sh.rows(), team[i], local[i]);
    const Block b{sh.x.data() + r.begin * k, sh.y.data() + r.begin, r.size()};
    plf_block(kr, b, k, beta, plan.n_chunks, grad, parts[i]);
  });
  return merge(parts, k, grad);
}

GradResult evaluate(const DesignMatrix& d, std::span<const double> beta, const ExecPlan& plan,
                    bool grad) {
  validate(plan);
  check_beta(d.n_cols(), beta);
  switch (plan.strategy) {
    case Strategy::Som: return eval_som(d, beta, plan, grad);
    case Strategy::Sharded: {
      const std::size_t s = std::min({plan.n_shards, plan.workers, d.n_rows()});
      return eval_sharded(*d.shards(s), beta, plan, grad);
    }
    default: return eval_rows(d, beta, plan, grad);
  }
}

}  // namespace

// --- DesignMatrix / ShardedMatrix -------------------------------------------------

struct DesignMatrix::ShardCache {
  std::mutex mu;
  std::map<std::size_t, std::shared_ptr<const ShardedMatrix>> by_count;
};

DesignMatrix::DesignMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> x,
                           std::vector<double> y)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      x_(std::move(x)),
      y_(std::move(y)),
      cache_(std::make_shared<ShardCache>()) {
  if (n_rows_ == 0 || n_cols_ == 0) throw InputError("design matrix needs N >= 1 and K >= 1");
  if (x_.size() != n_rows_ * n_cols_) {
    throw InputError("design matrix: x has " + std::to_string(x_.size()) + " entries, expected N*K = " +
                     std::to_string(n_rows_ * n_cols_));
  }
  if (y_.size() != n_rows_) {
    throw InputError("design matrix: y has " + std::to_string(y_.size()) + " entries, expected N = " +
                     std::to_string(n_rows_));
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i])) {
      throw InputError("design matrix: non-finite covariate at row " + std::to_string(i / n_cols_) +
                       ", column " + std::to_string(i % n_cols_));
    }
  }
  for (std::size_t n = 0; n < n_rows_; ++n) {
    if (y_[n] != 0.0 && y_[n] != 1.0) {
      throw InputError("design matrix: response at row " + std::to_string(n) + " is not 0 or 1");
    }
  }
}

std::shared_ptr<const ShardedMatrix> DesignMatrix::shards(std::size_t n_shards) const {
  std::lock_guard lk(cache_->mu);
  auto& slot = cache_->by_count[n_shards];
  if (!slot) slot = std::make_shared<const ShardedMatrix>(make_sharded(*this, n_shards));
  return slot;
}

ShardedMatrix::ShardedMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Shard> shards)
    : n_rows_(n_rows), n_cols_(n_cols), shards_(std::move(shards)) {
  if (shards_.empty()) throw InputError("sharded matrix needs at least one shard");
  std::size_t next = 0;
  for (const auto& s : shards_) {
    if (s.row_offset != next || s.x.size() != s.rows() * n_cols_) {
      throw InputError("shards must partition the rows contiguously and in order");
    }
    next += s.rows();
  }
  if (next != n_rows_) throw InputError("shards do not cover all rows");
}

ShardedMatrix make_sharded(const DesignMatrix& data, std::size_t n_shards) {
  const std::size_t n = data.n_rows(), k = data.n_cols();
  if (n_shards == 0 || n_shards > n) {
    throw InputError("n_shards must be in [1, N] (N = " + std::to_string(n) + ", got " +
                     std::to_string(n_shards) + ")");
  }
  std::vector<Shard> shards(n_shards);
  for (std::size_t s = 0; s < n_shards; ++s) {
    const RowRange r = static_partition(n, n_shards, s);
    auto xs = data.x().subspan(r.begin * k, r.size() * k);
    auto ys = data.y().subspan(r.begin, r.size());
    shards[s].x.assign(xs.begin(), xs.end());
    shards[s].y.assign(ys.begin(), ys.end());
    shards[s].row_offset = r.begin;
  }
  return ShardedMatrix(n, k, std::move(shards));
}

// --- Plans ---------------------------------------------------------------------

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Som: return "som";
    case Strategy::Mos: return "mos";
    case Strategy::Plf: return "plf";
    case Strategy::PlfChunked: return "plf-chunked";
    case Strategy::Sharded: return "sharded";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "som") return Strategy::Som;
  if (name == "mos") return Strategy::Mos;
  if (name == "plf") return Strategy::Plf;
  if (name == "plf-chunked" || name == "plfchunked" || name == "plf_chunked") return Strategy::PlfChunked;
  if (name == "sharded" || name == "numa") return Strategy::Sharded;
  throw InputError("unknown strategy '" + std::string(name) + "'");
}

void validate(const ExecPlan& plan) {
  if (plan.workers == 0 || plan.workers > kMaxWorkers) {
    throw InputError("workers must be in [1, " + std::to_string(kMaxWorkers) + "]");
  }
  if (plan.n_chunks == 0) throw InputError("n_chunks must be >= 1");
  if (plan.n_shards == 0) throw InputError("n_shards must be >= 1");
}

// --- Evaluation ------------------------------------------------------------------

double loglike(const DesignMatrix& data, std::span<const double> beta, const ExecPlan& plan) {
  return evaluate(data, beta, plan, false).f;
}

double loglike(const ShardedMatrix& data, std::span<const double> beta, const ExecPlan& plan) {
  validate(plan);
  check_beta(data.n_cols(), beta);
  return eval_sharded(data, beta, plan, false).f;
}

GradResult loglike_grad(const DesignMatrix& data, std::span<const double> beta,
                        const ExecPlan& plan) {
  return evaluate(data, beta, plan, true);
}

GradResult loglike_grad(const ShardedMatrix& data, std::span<const double> beta,
                        const ExecPlan& plan) {
  validate(plan);
  check_beta(data.n_cols(), beta);
  return eval_sharded(data, beta, plan, true);
}

// --- Differential update -----------------------------------------------------------

GlmWorkspace::GlmWorkspace(const DesignMatrix& data, std::span<const double> beta,
                           bool with_transpose)
    : n_rows_(data.n_rows()), n_cols_(data.n_cols()), beta_(beta.begin(), beta.end()) {
  check_beta(n_cols_, beta);
  if (with_transpose) {
    xt_.resize(n_rows_ * n_cols_);
    for (std::size_t n = 0; n < n_rows_; ++n) {
      for (std::size_t k = 0; k < n_cols_; ++k) xt_[k * n_rows_ + n] = data.at(n, k);
    }
  }
  refresh(data);
}

std::span<const double> GlmWorkspace::column(std::size_t k) const {
  if (xt_.empty()) throw InputError("workspace was built without the transposed copy");
  if (k >= n_cols_) throw InputError("coordinate index out of range");
  return std::span<const double>(xt_).subspan(k * n_rows_, n_rows_);
}

void GlmWorkspace::refresh(const DesignMatrix& data) {
  if (data.n_rows() != n_rows_ || data.n_cols() != n_cols_) {
    throw InputError("workspace and design matrix dimensions differ");
  }
  xbeta_.resize(n_rows_);
  simd::active().gemv_rows(data.x().data(), n_rows_, n_cols_, beta_.data(), xbeta_.data());
}

double GlmWorkspace::max_drift(const DesignMatrix& data) const {
  double worst = 0.0;
  for (std::size_t n = 0; n < n_rows_; ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_cols_; ++k) s += data.at(n, k) * beta_[k];
    worst = std::max(worst, std::fabs(s - xbeta_[n]));
  }
  return worst;
}

double diff_loglike(const GlmWorkspace& ws, const DesignMatrix& data, std::size_t k,
                    double delta_beta_k, const ExecPlan& plan) {
  validate(plan);
  if (data.n_rows() != ws.n_rows() || data.n_cols() != ws.n_cols()) {
    throw InputError("workspace and design matrix dimensions differ");
  }
  if (!std::isfinite(delta_beta_k)) throw InputError("delta must be finite");
  const auto col = ws.column(k);
  const auto& kr = simd::active();
  const std::size_t n = ws.n_rows(), w = plan.workers;
  const double* xb = ws.xbeta().data();
  const double* y = data.y().data();
  std::vector<double> parts(w, 0.0);
  parallel_region(w, [&](std::size_t i) {
    const RowRange r = static_partition(n, w, i);
    parts[i] = kr.loglike_shifted(xb + r.begin, col.data() + r.begin, delta_beta_k, y + r.begin,
                                  r.size());
  });
  double f = 0.0;
  for (double p : parts) f += p;
  count_merges(w);
  charge(n * (kShiftRowFlops + kTrRowFlops));
  return f;
}

void commit_update(GlmWorkspace& ws, std::size_t k, double delta_beta_k, const ExecPlan& plan) {
  validate(plan);
  if (!std::isfinite(delta_beta_k)) throw InputError("delta must be finite");
  const auto col = ws.column(k);
  if (delta_beta_k == 0.0) return;
  const auto& kr = simd::active();
  const std::size_t n = ws.n_rows_, w = plan.workers;
  double* xb = ws.xbeta_.data();
  parallel_region(w, [&](std::size_t i) {
    const RowRange r = static_partition(n, w, i);
    kr.axpy(delta_beta_k, col.data() + r.begin, xb + r.begin, r.size());
  });
  ws.beta_[k] += delta_beta_k;
}

std::uint64_t flop_count() { return g_flops.load(std::memory_order_relaxed); }

void reset_flop_count() { g_flops.store(0, std::memory_order_relaxed); }

}  // namespace mcmcperf::glm
