// Acceptance gate for the solver kit: eleven checks, one line of output each,
// exit code = number of failures. Everything here runs from scratch on every
// invocation; no fixtures, no golden files.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "uot/baseline.hpp"
#include "uot/cache_sim.hpp"
#include "uot/distributed.hpp"
#include "uot/fused.hpp"
#include "uot/metrics.hpp"
#include "uot/problem_io.hpp"
#include "uot/tiled.hpp"
#include "uot/trace.hpp"

namespace {

constexpr double kNever = 1e-300;  // positive but unreachable: fixed-length runs

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// 20 seeded 64x64 fp64 problems cycling the damping exponent; all five solver
// variants must agree elementwise after 50 iterations, and quickly.
Outcome c01_solver_agreement() {
  const double t0 = now_ms();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto p = uot::gen_problem_t<double>(seed, 64, 64);
    const double fi = seed % 3 == 0 ? 0.5 : (seed % 3 == 1 ? 0.75 : 1.0);
    p.er = 1.0;
    p.ep = (1.0 - fi) / fi;  // er/(er+ep) == fi

    const std::vector<uot::Matrix<double>> plans{
        uot::baseline_solve(p, kNever, 50).plan,
        uot::fused_solve(p, kNever, 50).plan,
        uot::fused_solve(p, kNever, 50, std::size_t(4)).plan,
        uot::tiled_solve(p, kNever, 50).plan,
        uot::distributed_solve(p, kNever, 50, std::size_t(3)).plan,
    };
    for (std::size_t i = 0; i < plans.size(); ++i)
      for (std::size_t j = i + 1; j < plans.size(); ++j)
        worst = std::max(worst, uot::max_abs_diff(plans[i], plans[j]));
  }
  const double secs = (now_ms() - t0) / 1000.0;
  std::ostringstream os;
  os << "max pairwise plan difference " << worst << " over 20 problems x 5 variants in " << secs
     << " s";
  return {worst <= 1e-10 && secs < 10.0, os.str()};
}

Outcome c02_operational_intensity() {
  const double i = uot::operational_intensity(10240, 10240, 4);
  std::ostringstream os;
  os << "I(10240,10240,fp32) = " << i;
  return {i >= 0.25 && i <= 0.2502, os.str()};
}

Outcome c03_ridge_points() {
  const double cpu = uot::ridge_point({"desktop-cpu", 793.6e9, 76.8e9});
  const double gpu = uot::ridge_point({"discrete-gpu", 40e12, 1008e9});
  std::ostringstream os;
  os << "cpu ridge " << cpu << " (target 10.3), gpu ridge " << gpu << " (target 39.7)";
  const bool ok =
      std::abs(cpu - 10.3) <= 0.005 * 10.3 && std::abs(gpu - 39.7) <= 0.005 * 39.7;
  return {ok, os.str()};
}

Outcome c04_traffic_ratio() {
  using P = std::pair<std::size_t, std::size_t>;
  for (const auto& [m, n] :
       {P{1, 1}, P{7, 3}, P{64, 64}, P{1000, 999}, P{4096, 4096}, P{10240, 1}}) {
    for (const std::size_t b : {4u, 8u}) {
      const auto fused = uot::traffic_model(m, n, b, uot::Variant::fused);
      const auto base = uot::traffic_model(m, n, b, uot::Variant::baseline);
      const std::uint64_t ideal = 2ull * m * n * b;
      if (fused.total_bytes != ideal || base.total_bytes != 3 * fused.total_bytes) {
        std::ostringstream os;
        os << "ratio broke at " << m << "x" << n << " b=" << b;
        return {false, os.str()};
      }
    }
  }
  return {true, "fused bytes = 2*M*N*b and baseline = 3x fused, exactly, on all 12 shapes"};
}

Outcome c05_cache_behavior() {
  const uot::CacheConfig cfg{256 * 1024, 64};
  const auto fused = uot::simulate_cache(uot::Variant::fused, 2048, 2048, 4, cfg);
  const auto base = uot::simulate_cache(uot::Variant::baseline, 2048, 2048, 4, cfg);
  const double ideal = 2.0 * 2048 * 2048 * 4;
  const double rel = std::abs(double(fused.dram_bytes) - ideal) / ideal;
  const double ratio = double(base.dram_bytes) / double(fused.dram_bytes);
  std::ostringstream os;
  os << "fused DRAM " << fused.dram_bytes << " bytes (" << rel * 100.0
     << "% off the 2*M*N*b ideal), baseline/fused ratio " << ratio;
  return {rel <= 0.10 && ratio >= 2.5, os.str()};
}

Outcome c06_access_counts() {
  const std::size_t m = 37, n = 21;
  const std::uint64_t mn = std::uint64_t(m) * n;
  auto p = uot::gen_problem_t<double>(123, m, n);
  const double fi = uot::compute_fi(p.er, p.ep);

  uot::Matrix<double> a = p.a;
  uot::FusedState st{uot::init_col_sums(a)};
  uot::CountingTrace fused_tr;
  uot::fused_iterate(a, st, p, fi, fused_tr);
  const std::uint64_t fl = fused_tr.total.loads_of(uot::Region::matrix);
  const std::uint64_t fs = fused_tr.total.stores_of(uot::Region::matrix);

  uot::Matrix<double> b = p.a;
  uot::CountingTrace base_tr;
  uot::baseline_iterate(b, p, fi, base_tr);
  const std::uint64_t bl = base_tr.total.loads_of(uot::Region::matrix);
  const std::uint64_t bs = base_tr.total.stores_of(uot::Region::matrix);

  std::ostringstream os;
  os << "fused " << fl << "L+" << fs << "S, baseline " << bl << "L+" << bs << "S per " << mn
     << " elements";
  return {fl == 2 * mn && fs == 2 * mn && bl == 4 * mn && bs == 2 * mn, os.str()};
}

Outcome c07_partial_padding() {
  for (std::size_t w = 2; w <= 16; ++w) {
    for (std::size_t n = 1; n <= 64; ++n) {
      uot::PartialTable table(w, n);
      const auto base = reinterpret_cast<std::uintptr_t>(table.row(0));
      if (base % 64 != 0) return {false, "table base not 64-byte aligned"};
      for (std::size_t k = 0; k + 1 < w; ++k) {
        const auto lo = reinterpret_cast<std::uintptr_t>(table.row(k));
        const auto hi = reinterpret_cast<std::uintptr_t>(table.row(k + 1));
        const std::uintptr_t last_line = (lo + n * sizeof(double) - 1) / 64;
        if (hi % 64 != 0 || last_line >= hi / 64) {
          std::ostringstream os;
          os << "rows " << k << " and " << k + 1 << " share a line at W=" << w << " N=" << n;
          return {false, os.str()};
        }
      }
    }
  }
  return {true, "no shared 64-byte lines between worker partials, W=2..16 x N=1..64"};
}

Outcome c08_balanced_convergence() {
  std::size_t worst_iters = 0;
  double worst_resid = 0.0;
  for (const std::uint64_t seed : {5u, 6u, 7u}) {
    auto p = uot::gen_problem_t<double>(seed, 32, 32);
    p.er = 1.0;
    p.ep = 0.0;  // fi = 1: plain normalization
    const double sr = std::accumulate(p.rpd.begin(), p.rpd.end(), 0.0);
    const double sc = std::accumulate(p.cpd.begin(), p.cpd.end(), 0.0);
    for (auto& v : p.cpd) v *= sr / sc;  // balanced: total mass agrees

    const double rpd_max = *std::max_element(p.rpd.begin(), p.rpd.end());
    for (const bool fused : {false, true}) {
      const auto r = fused ? uot::fused_solve(p, 1e-8, 10000)
                           : uot::baseline_solve(p, 1e-8, 10000);
      if (!r.report.converged) return {false, "did not converge within 10000 iterations"};
      worst_iters = std::max(worst_iters, r.report.iterations);
      for (std::size_t i = 0; i < 32; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < 32; ++j) rs += double(r.plan(i, j));
        worst_resid = std::max(worst_resid, std::abs(rs - p.rpd[i]));
      }
      if (worst_resid > 1e-8 * rpd_max) {
        std::ostringstream os;
        os << "marginal residual " << worst_resid << " exceeds tol*max(RPD) = " << 1e-8 * rpd_max;
        return {false, os.str()};
      }
    }
  }
  std::ostringstream os;
  os << "marginal residual " << worst_resid << " within tol*max(RPD); worst case " << worst_iters
     << " iterations";
  return {true, os.str()};
}

Outcome c09_fused_speed() {
  const std::size_t size = 4096, iters = 3;
  const auto p = uot::gen_problem_t<float>(77, size, size);
  const double fi = uot::compute_fi(p.er, p.ep);

  double base_ms = 1e300, fused_ms = 1e300;
  for (int rep = 0; rep < 2; ++rep) {  // best of two: first touch warms the pages
    {
      uot::Matrix<float> a = p.a;
      const double t0 = now_ms();
      for (std::size_t it = 0; it < iters; ++it) uot::baseline_iterate(a, p, fi);
      base_ms = std::min(base_ms, now_ms() - t0);
    }
    {
      uot::Matrix<float> a = p.a;
      uot::FusedState st{uot::init_col_sums(a)};
      const double t0 = now_ms();
      for (std::size_t it = 0; it < iters; ++it) uot::fused_iterate(a, st, p, fi);
      fused_ms = std::min(fused_ms, now_ms() - t0);
    }
  }
  std::ostringstream os;
  os << "4096x4096 fp32, 3 iterations: baseline " << base_ms << " ms, fused " << fused_ms
     << " ms, speedup " << base_ms / fused_ms << "x (direction asserted; magnitude reported only)";
  return {fused_ms <= base_ms, os.str()};
}

Outcome c10_distributed_invariants() {
  const auto p = uot::gen_problem_t<double>(31, 64, 64);

  const auto d3 = uot::distributed_solve(p, kNever, 50, std::size_t(3));
  const bool comm_ok = d3.report.iterations == 50 && d3.comm.allreduce_calls == 50 &&
                       d3.comm.doubles_reduced == 50ull * 64ull;

  const auto d1 = uot::distributed_solve(p, kNever, 25, std::size_t(1));
  const auto serial = uot::fused_solve(p, kNever, 25);
  const double diff = uot::max_abs_diff(d1.plan, serial.plan);
  const bool ident = diff == 0.0 && d1.factors.alpha == serial.factors.alpha &&
                     d1.factors.beta == serial.factors.beta;

  std::ostringstream os;
  os << d3.comm.allreduce_calls << " allreduce calls / 50 iterations, "
     << d3.comm.doubles_reduced << " doubles reduced; P=1 vs serial max diff " << diff;
  return {comm_ok && ident, os.str()};
}

Outcome c11_lane_coalescing() {
  using P = std::pair<std::size_t, std::size_t>;
  std::uint64_t groups_seen = 0, full_groups = 0;
  for (const auto& [m, n] : {P{64, 64}, P{80, 48}, P{33, 70}}) {
    const auto p = uot::gen_problem_t<double>(m + n, m, n);
    const double fi = uot::compute_fi(p.er, p.ep);
    uot::Matrix<double> a = p.a;
    uot::FusedState st{uot::init_col_sums(a)};
    uot::TileTrace t2, t4;
    t2.record_groups = t4.record_groups = true;
    uot::tiled_iterate(a, st, p, fi, uot::default_part2_config(m, n),
                       uot::default_part4_config(m, n), &t2, &t4);

    for (const auto* tr : {&t2, &t4}) {
      for (const auto& g : tr->groups) {
        if (g.elems.empty()) continue;  // group fully outside the matrix edge
        ++groups_seen;
        const std::size_t row = g.elems.front() / n;
        const std::size_t col0 = g.elems.front() % n;
        for (std::size_t k = 0; k < g.elems.size(); ++k) {
          if (g.elems[k] != row * n + col0 + k) {
            std::ostringstream os;
            os << "non-consecutive lane group at " << m << "x" << n << " block " << g.block
               << " step " << g.step;
            return {false, os.str()};
          }
        }
        if (row < m && col0 + uot::kLaneGroup <= n) {
          if (g.elems.size() != uot::kLaneGroup) {
            std::ostringstream os;
            os << "interior group of " << g.elems.size() << " lanes at " << m << "x" << n;
            return {false, os.str()};
          }
          ++full_groups;
        }
      }
    }
  }
  std::ostringstream os;
  os << groups_seen << " lane groups audited (" << full_groups
     << " full 32-lane interior groups), all touch one row, consecutive columns";
  return {groups_seen > 0 && full_groups > 0, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"solver-agreement", c01_solver_agreement},
      {"operational-intensity", c02_operational_intensity},
      {"ridge-points", c03_ridge_points},
      {"traffic-model", c04_traffic_ratio},
      {"cache-behavior", c05_cache_behavior},
      {"access-counts", c06_access_counts},
      {"partial-padding", c07_partial_padding},
      {"balanced-convergence", c08_balanced_convergence},
      {"fused-speed", c09_fused_speed},
      {"distributed-invariants", c10_distributed_invariants},
      {"lane-coalescing", c11_lane_coalescing},
  };

  int failures = 0;
  int number = 0;
  for (const auto& c : criteria) {
    ++number;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %02d %s: %s\n", o.pass ? "PASS" : "FAIL", number, c.name,
                o.detail.c_str());
  }
  return failures;
}
