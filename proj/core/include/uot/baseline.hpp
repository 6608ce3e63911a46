#pragma once

#include <chrono>
#include <span>
#include <vector>

#include "uot/problem.hpp"
#include "uot/scaling.hpp"
#include "uot/trace.hpp"

namespace uot {

enum class Axis { row, column };

// Reference rescale pass: two full sweeps of A per axis — one to accumulate
// the slice sums, one to multiply each slice by (target / sum)^fi. The column
// pass walks the row-major matrix in column order on purpose: this is the
// memory pattern whose cost the fused solver exists to remove, and the cache
// simulator replays it as-is. Element accesses per pass: 2 loads + 1 store.
// Returns the factors applied to the axis.
template <typename T, typename Trace>
std::vector<double> baseline_rescale_pass(Matrix<T>& a, std::span<const double> targets,
                                          double fi, Axis axis, Trace& tr) {
  const std::size_t m = a.rows(), n = a.cols();
  if (targets.size() != (axis == Axis::row ? m : n))
    throw InvalidParameter("baseline_rescale_pass: target length does not match axis extent");

  if (axis == Axis::column) {
    std::vector<double> sums(n);
    tr.begin_phase("col_sum");
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        tr.load(Region::matrix, i * n + j);
        s += double(a(i, j));
      }
      tr.store(Region::col_sums, j);
      sums[j] = s;
    }
    std::vector<double> factors(n);
    for (std::size_t j = 0; j < n; ++j) {
      tr.load(Region::col_sums, j);
      tr.load(Region::col_marginal, j);
      factors[j] = rescale_factor(targets[j], sums[j], fi);
      tr.store(Region::factor_col, j);
    }
    tr.begin_phase("col_scale");
    for (std::size_t j = 0; j < n; ++j) {
      tr.load(Region::factor_col, j);
      const double f = factors[j];
      for (std::size_t i = 0; i < m; ++i) {
        tr.load(Region::matrix, i * n + j);
        tr.store(Region::matrix, i * n + j);
        a(i, j) = T(double(a(i, j)) * f);
      }
    }
    return factors;
  }

  std::vector<double> sums(m);
  tr.begin_phase("row_sum");
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      tr.load(Region::matrix, i * n + j);
      s += double(row[j]);
    }
    tr.store(Region::row_sums, i);
    sums[i] = s;
  }
  std::vector<double> factors(m);
  for (std::size_t i = 0; i < m; ++i) {
    tr.load(Region::row_sums, i);
    tr.load(Region::row_marginal, i);
    factors[i] = rescale_factor(targets[i], sums[i], fi);
    tr.store(Region::factor_row, i);
  }
  tr.begin_phase("row_scale");
  for (std::size_t i = 0; i < m; ++i) {
    tr.load(Region::factor_row, i);
    const double f = factors[i];
    T* row = a.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      tr.load(Region::matrix, i * n + j);
      row[j] = T(double(row[j]) * f);
      tr.store(Region::matrix, i * n + j);
    }
  }
  return factors;
}

template <typename T>
std::vector<double> baseline_rescale_pass(Matrix<T>& a, std::span<const double> targets,
                                          double fi, Axis axis) {
  NoTrace tr;
  return baseline_rescale_pass(a, targets, fi, axis, tr);
}

// One full iteration, canonical order: column pass, then row pass.
// Four separate sweeps of A in total (6 element accesses per entry).
template <typename T, typename Trace>
ScalingFactors baseline_iterate(Matrix<T>& a, const Problem<T>& p, double fi, Trace& tr) {
  if (a.rows() != p.m() || a.cols() != p.n())
    throw InvalidParameter("baseline_iterate: matrix shape does not match problem");
  ScalingFactors f;
  f.beta = baseline_rescale_pass(a, std::span<const double>(p.cpd), fi, Axis::column, tr);
  f.alpha = baseline_rescale_pass(a, std::span<const double>(p.rpd), fi, Axis::row, tr);
  return f;
}

template <typename T>
ScalingFactors baseline_iterate(Matrix<T>& a, const Problem<T>& p, double fi) {
  NoTrace tr;
  return baseline_iterate(a, p, fi, tr);
}

// Iterate until max |factor - 1| <= tol (checked every iteration) or max_iter.
template <typename T>
SolveResult<T> baseline_solve(const Problem<T>& p, double tol, std::size_t max_iter) {
  require_valid(p);
  if (!(tol > 0.0)) throw InvalidParameter("baseline_solve: tol must be positive");
  if (max_iter < 1) throw InvalidParameter("baseline_solve: max_iter must be at least 1");

  const double fi = compute_fi(p.er, p.ep);
  SolveResult<T> r;
  r.plan = p.a;
  r.report.solver = "baseline";
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t it = 1; it <= max_iter; ++it) {
    r.factors = baseline_iterate(r.plan, p, fi);
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

}  // namespace uot
