#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <span>
#include <vector>

#include "uot/fused.hpp"
#include "uot/problem.hpp"
#include "uot/scaling.hpp"

namespace uot {

// Deterministic emulation of the accelerator mapping of the fused iteration.
// The iteration is split into four stages executed in this order:
//   1. column factors from the carried column sums      (serial, O(N))
//   2. column-factor application, accumulating row sums  (part4_tiles)
//   3. row factors from the fresh row sums               (serial, O(M))
//   4. row-factor application, accumulating column sums  (part2_tiles)
// The numeric stage names below are the kernels' identifiers in the launch
// split this module mirrors: part2 = row-factor kernel, part4 = column-factor
// kernel. Lanes are emulated in lockstep groups of 32; cross-block
// accumulation ("atomicAdd") is modeled as serial accumulation in ascending
// (block-y, block-x) order so every run of a given configuration is
// bit-reproducible.

inline constexpr std::size_t kLaneGroup = 32;

struct TileConfig {
  std::size_t bx = 1;  // grid extent in blocks, along columns
  std::size_t by = 1;  // grid extent in blocks, along rows
  std::size_t tx = 1;  // block extent in lanes, along columns
  std::size_t ty = 1;  // block extent in lanes, along rows
  std::size_t ny = 1;  // rows per lane (part2) / rows per block (part4)
};

// Shapes used when the caller does not pick a configuration:
//   part2: tx=32, ty=2, ny=8; part4: tx=128, ty=1, ny=8; grids by ceiling division.
TileConfig default_part2_config(std::size_t m, std::size_t n);
TileConfig default_part4_config(std::size_t m, std::size_t n);

// Throw ConfigError unless the grid covers the matrix (and, for part4, the
// block is one row of lanes whose width is a whole number of lane groups).
void validate_part2_config(const TileConfig& cfg, std::size_t m, std::size_t n);
void validate_part4_config(const TileConfig& cfg, std::size_t m, std::size_t n);

// Journal of everything observable about a kernel emulation. `atomics` is
// always filled when a trace is attached: one entry per modeled atomicAdd, in
// execution order. Lane-group element accesses and staged per-group sums are
// recorded only on request (they are large).
struct TileTrace {
  struct Atomic {
    std::size_t block;   // linear block id: by * grid_bx + bx
    std::size_t target;  // accumulated index (column for part2, row for part4)
    double value;
  };
  struct LaneGroup {
    std::size_t block;
    std::size_t group;  // lane-group index within the block
    std::size_t step;   // row step within the block's slice
    std::vector<std::size_t> elems;  // flat matrix indices touched, active lanes in lane order
  };
  struct StagedSums {
    std::size_t block;
    std::size_t step;
    std::vector<double> cells;  // one partial per lane group (part4)
  };

  std::vector<Atomic> atomics;
  std::vector<LaneGroup> groups;
  std::vector<StagedSums> staged;
  bool record_groups = false;
  bool record_staged = false;
};

// Lockstep halving reduction over one lane group: offsets 16, 8, 4, 2, 1;
// every lane reads its partner's pre-step value (lanes past the end of the
// group contribute nothing). The group total lands in lane 0.
inline double shuffle_down_reduce(const std::array<double, kLaneGroup>& lane_values) {
  std::array<double, kLaneGroup> v = lane_values;
  for (std::size_t offset = kLaneGroup / 2; offset >= 1; offset /= 2) {
    const std::array<double, kLaneGroup> snap = v;
    for (std::size_t l = 0; l < kLaneGroup; ++l)
      v[l] = snap[l] + (l + offset < kLaneGroup ? snap[l + offset] : 0.0);
  }
  return v[0];
}

// Row-factor kernel: A[r][c] *= factor_row[r] for every element, while each
// lane accumulates its column's contribution into block-shared cells; after
// the block's rows are done the cells are column-reduced and added to the
// global column sums. Returns those sums (length N).
template <typename T>
std::vector<double> part2_tiles(Matrix<T>& a, std::span<const double> row_factors,
                                const TileConfig& cfg, TileTrace* trace = nullptr) {
  const std::size_t m = a.rows(), n = a.cols();
  validate_part2_config(cfg, m, n);
  if (row_factors.size() != m)
    throw InvalidParameter("part2_tiles: row factor length does not match rows");

  std::vector<double> col_sums(n, 0.0);
  const std::size_t lanes = cfg.ty * cfg.tx;
  const std::size_t groups = (lanes + kLaneGroup - 1) / kLaneGroup;
  std::vector<double> cells(lanes);

  for (std::size_t by = 0; by < cfg.by; ++by) {
    for (std::size_t bx = 0; bx < cfg.bx; ++bx) {
      const std::size_t block = by * cfg.bx + bx;
      std::fill(cells.begin(), cells.end(), 0.0);

      for (std::size_t step = 0; step < cfg.ny; ++step) {
        for (std::size_t g = 0; g < groups; ++g) {
          TileTrace::LaneGroup rec;
          const std::size_t lane_end = std::min(lanes, (g + 1) * kLaneGroup);
          for (std::size_t lane = g * kLaneGroup; lane < lane_end; ++lane) {
            const std::size_t ty = lane / cfg.tx, tx = lane % cfg.tx;
            const std::size_t r = cfg.ny * (cfg.ty * by + ty) + step;
            const std::size_t c = cfg.tx * bx + tx;
            if (r >= m || c >= n) continue;  // boundary guard
            const double v = double(a(r, c)) * row_factors[r];
            a(r, c) = T(v);
            cells[lane] += double(a(r, c));
            if (trace && trace->record_groups) rec.elems.push_back(r * n + c);
          }
          if (trace && trace->record_groups) {
            rec.block = block;
            rec.group = g;
            rec.step = step;
            trace->groups.push_back(std::move(rec));
          }
        }
      }

      // Column-reduce the block cells (ascending ty), then one modeled
      // atomicAdd per in-range column, ascending tx.
      for (std::size_t tx = 0; tx < cfg.tx; ++tx) {
        const std::size_t c = cfg.tx * bx + tx;
        if (c >= n) continue;
        double s = 0.0;
        for (std::size_t ty = 0; ty < cfg.ty; ++ty) s += cells[ty * cfg.tx + tx];
        col_sums[c] += s;
        if (trace) trace->atomics.push_back({block, c, s});
      }
    }
  }
  return col_sums;
}

// Column-factor kernel: A[r][c] *= factor_col[c]; each block walks ny
// consecutive rows, one row per step; every lane group reduces its 32 scaled
// values with shuffle_down_reduce, the group partials are staged in block
// cells, reduced ascending, and added to the global row sum — one modeled
// atomicAdd per (block, step). Returns the row sums (length M).
template <typename T>
std::vector<double> part4_tiles(Matrix<T>& a, std::span<const double> col_factors,
                                const TileConfig& cfg, TileTrace* trace = nullptr) {
  const std::size_t m = a.rows(), n = a.cols();
  validate_part4_config(cfg, m, n);
  if (col_factors.size() != n)
    throw InvalidParameter("part4_tiles: column factor length does not match columns");

  std::vector<double> row_sums(m, 0.0);
  const std::size_t groups = cfg.tx / kLaneGroup;
  std::vector<double> staged(groups);

  for (std::size_t by = 0; by < cfg.by; ++by) {
    for (std::size_t bx = 0; bx < cfg.bx; ++bx) {
      const std::size_t block = by * cfg.bx + bx;
      for (std::size_t step = 0; step < cfg.ny; ++step) {
        const std::size_t r = cfg.ny * by + step;
        if (r >= m) continue;  // boundary guard: the whole step is inactive

        for (std::size_t g = 0; g < groups; ++g) {
          std::array<double, kLaneGroup> vals{};
          TileTrace::LaneGroup rec;
          for (std::size_t l = 0; l < kLaneGroup; ++l) {
            const std::size_t tx = g * kLaneGroup + l;
            const std::size_t c = cfg.tx * bx + tx;
            if (c >= n) continue;  // boundary guard: lane idles, contributes 0
            const double v = double(a(r, c)) * col_factors[c];
            a(r, c) = T(v);
            vals[l] = double(a(r, c));
            if (trace && trace->record_groups) rec.elems.push_back(r * n + c);
          }
          staged[g] = shuffle_down_reduce(vals);
          if (trace && trace->record_groups) {
            rec.block = block;
            rec.group = g;
            rec.step = step;
            trace->groups.push_back(std::move(rec));
          }
        }

        if (trace && trace->record_staged)
          trace->staged.push_back({block, step, std::vector<double>(staged.begin(), staged.end())});

        double s = 0.0;
        for (std::size_t g = 0; g < groups; ++g) s += staged[g];  // ascending group order
        row_sums[r] += s;
        if (trace) trace->atomics.push_back({block, r, s});
      }
    }
  }
  return row_sums;
}

// One full iteration on the tile grid; carries column sums exactly like the
// fused solver, so it is interchangeable with it up to summation order.
template <typename T>
ScalingFactors tiled_iterate(Matrix<T>& a, FusedState& state, const Problem<T>& p, double fi,
                             const TileConfig& part2_cfg, const TileConfig& part4_cfg,
                             TileTrace* part2_trace = nullptr, TileTrace* part4_trace = nullptr) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m != p.m() || n != p.n())
    throw InvalidParameter("tiled_iterate: matrix shape does not match problem");
  if (state.col_sums.size() != n)
    throw InvalidParameter("tiled_iterate: carried column sums have wrong length");

  NoTrace nt;
  ScalingFactors f;
  f.beta = detail::beta_from_state(state.col_sums, std::span<const double>(p.cpd), fi, nt);
  const std::vector<double> row_sums =
      part4_tiles(a, std::span<const double>(f.beta), part4_cfg, part4_trace);
  f.alpha.resize(m);
  for (std::size_t i = 0; i < m; ++i) f.alpha[i] = rescale_factor(p.rpd[i], row_sums[i], fi);
  state.col_sums = part2_tiles(a, std::span<const double>(f.alpha), part2_cfg, part2_trace);
  return f;
}

template <typename T>
ScalingFactors tiled_iterate(Matrix<T>& a, FusedState& state, const Problem<T>& p, double fi) {
  return tiled_iterate(a, state, p, fi, default_part2_config(a.rows(), a.cols()),
                       default_part4_config(a.rows(), a.cols()));
}

template <typename T>
SolveResult<T> tiled_solve(const Problem<T>& p, double tol, std::size_t max_iter,
                           const TileConfig& part2_cfg, const TileConfig& part4_cfg) {
  require_valid(p);
  if (!(tol > 0.0)) throw InvalidParameter("tiled_solve: tol must be positive");
  if (max_iter < 1) throw InvalidParameter("tiled_solve: max_iter must be at least 1");
  validate_part2_config(part2_cfg, p.m(), p.n());
  validate_part4_config(part4_cfg, p.m(), p.n());

  const double fi = compute_fi(p.er, p.ep);
  SolveResult<T> r;
  r.plan = p.a;
  r.report.solver = "tiled";
  const auto t0 = std::chrono::steady_clock::now();
  FusedState state{init_col_sums(r.plan)};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    r.factors = tiled_iterate(r.plan, state, p, fi, part2_cfg, part4_cfg);
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
SolveResult<T> tiled_solve(const Problem<T>& p, double tol, std::size_t max_iter) {
  return tiled_solve(p, tol, max_iter, default_part2_config(p.m(), p.n()),
                     default_part4_config(p.m(), p.n()));
}

}  // namespace uot
