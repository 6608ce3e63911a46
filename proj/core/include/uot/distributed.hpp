#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "uot/fused.hpp"
#include "uot/problem.hpp"
#include "uot/scaling.hpp"

namespace uot {

// Contiguous row-block partition across P simulated ranks. Unlike WorkerPlan,
// a rank without rows is an error: a partition is a deployment statement, not
// a scheduling convenience.
struct RankPartition {
  std::size_t ranks = 1;
  std::vector<WorkerBlock> blocks;

  static RankPartition make(std::size_t ranks, std::size_t rows);
};

struct CommStats {
  std::uint64_t allreduce_calls = 0;
  std::uint64_t doubles_reduced = 0;  // output vector lengths, summed over calls
};

// The one collective of the algorithm: elementwise sum of the ranks' partial
// column sums, accumulated in ascending rank order; every rank then observes
// the identical result vector.
std::vector<double> allreduce_vectors(const std::vector<std::vector<double>>& partials);

template <typename T>
struct DistributedResult {
  Matrix<T> plan;
  ScalingFactors factors;
  SolveReport report;
  CommStats comm;
};

// Data-parallel simulation of the fused solver: each rank owns a contiguous
// row block and runs the fused row pass locally; the only cross-rank data
// motion is one N-vector allreduce of column partials per iteration. Ranks
// execute as a deterministic round-robin loop, so results are reproducible.
//
// Convergence is decided from the full factor set (replicated beta plus the
// union of the rank-local alpha blocks, both visible to this in-process
// harness), which makes the stopping rule identical to the serial solver's.
// A message-passing port would add one scalar max-reduction for the alpha
// part of the error.
template <typename T>
DistributedResult<T> distributed_solve(const Problem<T>& p, double tol, std::size_t max_iter,
                                       const RankPartition& part) {
  require_valid(p);
  if (!(tol > 0.0)) throw InvalidParameter("distributed_solve: tol must be positive");
  if (max_iter < 1) throw InvalidParameter("distributed_solve: max_iter must be at least 1");
  const std::size_t m = p.m(), n = p.n();
  if (part.blocks.size() != part.ranks || part.blocks.empty() || part.blocks.back().end != m)
    throw PartitionError("distributed_solve: partition does not cover the matrix rows");

  const double fi = compute_fi(p.er, p.ep);
  const std::size_t ranks = part.ranks;

  struct RankState {
    Matrix<T> rows;                 // owned row block
    std::vector<double> partials;   // local column sums
    std::vector<double> col_sums;   // replica of the reduced vector
    std::vector<double> beta;       // replica of the column factors
  };

  std::vector<RankState> rank(ranks);
  for (std::size_t r = 0; r < ranks; ++r) {
    const WorkerBlock b = part.blocks[r];
    rank[r].rows = Matrix<T>(b.size(), n);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) rank[r].rows(i, j) = p.a(b.begin + i, j);
    rank[r].partials = init_col_sums(rank[r].rows);
  }

  DistributedResult<T> out;
  out.report.solver = "dist";
  out.factors.alpha.resize(m);
  NoTrace nt;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t it = 1; it <= max_iter; ++it) {
    // The collective: gather every rank's N-vector, reduce, replicate.
    std::vector<std::vector<double>> gathered;
    gathered.reserve(ranks);
    for (std::size_t r = 0; r < ranks; ++r) gathered.push_back(rank[r].partials);
    std::vector<double> reduced = allreduce_vectors(gathered);
    out.comm.allreduce_calls += 1;
    out.comm.doubles_reduced += reduced.size();

    for (std::size_t r = 0; r < ranks; ++r) {
      rank[r].col_sums = reduced;
      rank[r].beta = detail::beta_from_state(rank[r].col_sums,
                                             std::span<const double>(p.cpd), fi, nt);
    }

    // Local fused passes; each rank rebuilds its partial column sums.
    for (std::size_t r = 0; r < ranks; ++r) {
      const WorkerBlock b = part.blocks[r];
      std::fill(rank[r].partials.begin(), rank[r].partials.end(), 0.0);
      for (std::size_t i = 0; i < b.size(); ++i)
        out.factors.alpha[b.begin + i] = detail::fused_row_pass(
            rank[r].rows, i, std::span<const double>(rank[r].beta), p.rpd[b.begin + i], fi,
            rank[r].partials.data(), nt);
    }
    out.factors.beta = rank[0].beta;  // identical on every rank

    out.report.iterations = it;
    out.report.final_error = convergence_error(out.factors);
    if (out.report.final_error <= tol) {
      out.report.converged = true;
      break;
    }
  }
  out.report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  out.plan = Matrix<T>(m, n);
  for (std::size_t r = 0; r < ranks; ++r) {
    const WorkerBlock b = part.blocks[r];
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) out.plan(b.begin + i, j) = rank[r].rows(i, j);
  }
  return out;
}

template <typename T>
DistributedResult<T> distributed_solve(const Problem<T>& p, double tol, std::size_t max_iter,
                                       std::size_t ranks) {
  return distributed_solve(p, tol, max_iter, RankPartition::make(ranks, p.m()));
}

}  // namespace uot
