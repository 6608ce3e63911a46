#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <thread>
#include <vector>

#include "uot/problem.hpp"
#include "uot/scaling.hpp"
#include "uot/trace.hpp"

namespace uot {

// Column sums carried from one iteration into the next; what lets the fused
// iteration touch each matrix element only twice instead of six times.
struct FusedState {
  std::vector<double> col_sums;
};

// Contiguous, balanced row blocks: block sizes differ by at most one, earlier
// blocks take the remainder. workers may exceed rows (trailing blocks empty).
struct WorkerBlock {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct WorkerPlan {
  std::size_t workers = 1;
  std::vector<WorkerBlock> blocks;
  std::size_t partial_stride = 0;  // doubles per worker partial row; multiple of 8 (one cache line)

  static WorkerPlan make(std::size_t workers, std::size_t rows, std::size_t cols);
};

// Per-worker column-sum rows, 64-byte aligned base, row stride padded to a
// whole number of cache lines so no two workers ever share a line.
class PartialTable {
 public:
  PartialTable(std::size_t workers, std::size_t cols)
      : workers_(workers), cols_(cols), stride_(WorkerPlan::make(1, 1, cols).partial_stride) {
    data_ = static_cast<double*>(std::aligned_alloc(64, workers_ * stride_ * sizeof(double)));
    if (!data_) throw std::bad_alloc();
    zero();
  }
  ~PartialTable() { std::free(data_); }
  PartialTable(const PartialTable&) = delete;
  PartialTable& operator=(const PartialTable&) = delete;

  std::size_t workers() const { return workers_; }
  std::size_t cols() const { return cols_; }
  std::size_t stride() const { return stride_; }
  double* row(std::size_t w) { return data_ + w * stride_; }
  const double* row(std::size_t w) const { return data_ + w * stride_; }

  void zero() {
    for (std::size_t k = 0; k < workers_ * stride_; ++k) data_[k] = 0.0;
  }

 private:
  std::size_t workers_, cols_, stride_;
  double* data_ = nullptr;
};

// Plain row-major accumulation of column sums; seed state for the first iteration.
template <typename T, typename Trace>
std::vector<double> init_col_sums(const Matrix<T>& a, Trace& tr) {
  std::vector<double> cs(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      tr.load(Region::matrix, i * a.cols() + j);
      tr.load(Region::col_sums, j);
      cs[j] += double(row[j]);
      tr.store(Region::col_sums, j);
    }
  }
  return cs;
}

template <typename T>
std::vector<double> init_col_sums(const Matrix<T>& a) {
  NoTrace tr;
  return init_col_sums(a, tr);
}

// Seed grouped like the parallel reduction: per-block partials combined in
// ascending block order, so the carried sums have the same rounding tree on
// every iteration including the first. With one block this reproduces the
// plain row-major accumulation bit for bit.
template <typename T>
std::vector<double> init_col_sums(const Matrix<T>& a, std::span<const WorkerBlock> blocks) {
  const std::size_t n = a.cols();
  std::vector<double> cs(n, 0.0);
  std::vector<double> part(n);
  for (const WorkerBlock& b : blocks) {
    std::fill(part.begin(), part.end(), 0.0);
    for (std::size_t i = b.begin; i < b.end; ++i) {
      const T* row = a.row(i);
      for (std::size_t j = 0; j < n; ++j) part[j] += double(row[j]);
    }
    for (std::size_t j = 0; j < n; ++j) cs[j] += part[j];
  }
  return cs;
}

namespace detail {

// The fused body for one row: scale by the column factors while accumulating
// the row sum, derive the row factor, scale again while accumulating next
// iteration's column sums. Two ascending sweeps; the matrix element is loaded
// and stored exactly once per sweep. Sums read back the stored (dtype-rounded)
// value so every variant — and the reference solver — adds the same numbers.
template <typename T, typename Trace>
double fused_row_pass(Matrix<T>& a, std::size_t i, std::span<const double> beta,
                      double target, double fi, double* next_cols, Trace& tr) {
  const std::size_t n = a.cols();
  T* row = a.row(i);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    tr.load(Region::factor_col, j);
    tr.load(Region::matrix, i * n + j);
    row[j] = T(double(row[j]) * beta[j]);
    tr.store(Region::matrix, i * n + j);
    s += double(row[j]);
  }
  tr.load(Region::row_marginal, i);
  const double alpha = rescale_factor(target, s, fi);
  tr.store(Region::factor_row, i);
  for (std::size_t j = 0; j < n; ++j) {
    tr.load(Region::matrix, i * n + j);
    row[j] = T(double(row[j]) * alpha);
    tr.store(Region::matrix, i * n + j);
    tr.load(Region::col_sums, j);
    next_cols[j] += double(row[j]);
    tr.store(Region::col_sums, j);
  }
  return alpha;
}

template <typename Trace>
std::vector<double> beta_from_state(const std::vector<double>& col_sums,
                                    std::span<const double> cpd, double fi, Trace& tr) {
  std::vector<double> beta(col_sums.size());
  for (std::size_t j = 0; j < col_sums.size(); ++j) {
    tr.load(Region::col_sums, j);
    tr.load(Region::col_marginal, j);
    beta[j] = rescale_factor(cpd[j], col_sums[j], fi);
    tr.store(Region::factor_col, j);
  }
  return beta;
}

}  // namespace detail

// One fused iteration, serial. state.col_sums must hold the column sums of a
// (init_col_sums provides them before the first call; afterwards the iteration
// maintains them). Matrix element accesses: exactly 2 loads + 2 stores.
template <typename T, typename Trace>
ScalingFactors fused_iterate(Matrix<T>& a, FusedState& state, const Problem<T>& p, double fi,
                             Trace& tr) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m != p.m() || n != p.n())
    throw InvalidParameter("fused_iterate: matrix shape does not match problem");
  if (state.col_sums.size() != n)
    throw InvalidParameter("fused_iterate: carried column sums have wrong length");

  ScalingFactors f;
  tr.begin_phase("beta");
  f.beta = detail::beta_from_state(state.col_sums, std::span<const double>(p.cpd), fi, tr);
  f.alpha.resize(m);

  tr.begin_phase("rows");
  std::vector<double> next(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    f.alpha[i] = detail::fused_row_pass(a, i, std::span<const double>(f.beta), p.rpd[i], fi,
                                        next.data(), tr);
  state.col_sums = std::move(next);
  return f;
}

template <typename T>
ScalingFactors fused_iterate(Matrix<T>& a, FusedState& state, const Problem<T>& p, double fi) {
  NoTrace tr;
  return fused_iterate(a, state, p, fi, tr);
}

// Parallel fused iteration: W workers over the plan's row blocks, each
// accumulating column sums into its own padded partial row; one join per
// iteration, then an ordered reduction (ascending worker index) so results are
// reproducible run to run. W = 1 degenerates to the serial arithmetic exactly.
template <typename T>
ScalingFactors fused_iterate_parallel(Matrix<T>& a, FusedState& state, const Problem<T>& p,
                                      double fi, const WorkerPlan& plan, PartialTable& partials) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m != p.m() || n != p.n())
    throw InvalidParameter("fused_iterate_parallel: matrix shape does not match problem");
  if (state.col_sums.size() != n)
    throw InvalidParameter("fused_iterate_parallel: carried column sums have wrong length");
  if (plan.blocks.empty() || plan.blocks.back().end != m)
    throw InvalidParameter("fused_iterate_parallel: plan does not cover the matrix rows");
  if (partials.workers() < plan.workers || partials.cols() != n)
    throw InvalidParameter("fused_iterate_parallel: partial table does not fit the plan");

  NoTrace nt;
  ScalingFactors f;
  f.beta = detail::beta_from_state(state.col_sums, std::span<const double>(p.cpd), fi, nt);
  f.alpha.resize(m);
  partials.zero();

  std::vector<std::exception_ptr> errors(plan.workers);
  auto body = [&](std::size_t w) {
    try {
      NoTrace tr;
      double* mine = partials.row(w);
      const WorkerBlock b = plan.blocks[w];
      for (std::size_t i = b.begin; i < b.end; ++i)
        f.alpha[i] = detail::fused_row_pass(a, i, std::span<const double>(f.beta), p.rpd[i], fi,
                                            mine, tr);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (plan.workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(plan.workers - 1);
    for (std::size_t w = 1; w < plan.workers; ++w) threads.emplace_back(body, w);
    body(0);
    for (auto& t : threads) t.join();  // the single synchronization point
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Ordered reduction: worker 0 first, then 1, ... — fixed grouping, fixed result.
  std::vector<double> next(n, 0.0);
  for (std::size_t w = 0; w < plan.workers; ++w) {
    const double* part = partials.row(w);
    for (std::size_t j = 0; j < n; ++j) next[j] += part[j];
  }
  state.col_sums = std::move(next);
  return f;
}

template <typename T>
ScalingFactors fused_iterate_parallel(Matrix<T>& a, FusedState& state, const Problem<T>& p,
                                      double fi, const WorkerPlan& plan) {
  PartialTable partials(plan.workers, a.cols());
  return fused_iterate_parallel(a, state, p, fi, plan, partials);
}

template <typename T>
SolveResult<T> fused_solve(const Problem<T>& p, double tol, std::size_t max_iter,
                           const WorkerPlan& plan) {
  require_valid(p);
  if (!(tol > 0.0)) throw InvalidParameter("fused_solve: tol must be positive");
  if (max_iter < 1) throw InvalidParameter("fused_solve: max_iter must be at least 1");

  const double fi = compute_fi(p.er, p.ep);
  SolveResult<T> r;
  r.plan = p.a;
  r.report.solver = plan.workers > 1 ? "parallel" : "fused";
  const auto t0 = std::chrono::steady_clock::now();
  FusedState state{init_col_sums(r.plan, std::span<const WorkerBlock>(plan.blocks))};
  PartialTable partials(plan.workers, p.n());
  for (std::size_t it = 1; it <= max_iter; ++it) {
    r.factors = fused_iterate_parallel(r.plan, state, p, fi, plan, partials);
    r.report.iterations = it;
    r.report.final_error = convergence_error(r.factors);
    if (r.report.final_error <= tol) {
      r.report.converged = true;
      break;
    }
  }
  r.report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

template <typename T>
SolveResult<T> fused_solve(const Problem<T>& p, double tol, std::size_t max_iter,
                           std::size_t workers = 1) {
  return fused_solve(p, tol, max_iter, WorkerPlan::make(workers, p.m(), p.n()));
}

}  // namespace uot
