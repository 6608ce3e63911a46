// uot: command-line front end for the unbalanced-transport solver kit.
// Subcommands: gen, solve, verify, bench, traffic, roofline.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "uot/baseline.hpp"
#include "uot/cache_sim.hpp"
#include "uot/distributed.hpp"
#include "uot/error.hpp"
#include "uot/fused.hpp"
#include "uot/metrics.hpp"
#include "uot/problem_io.hpp"
#include "uot/tiled.hpp"

namespace {

using nlohmann::json;

// A tol below any reachable factor error: "run exactly max_iter iterations".
constexpr double kNeverTol = 1e-300;

uot::Dtype parse_dtype(const std::string& s) {
  if (s == "fp32") return uot::Dtype::f32;
  if (s == "fp64") return uot::Dtype::f64;
  throw uot::InvalidParameter("dtype must be fp32 or fp64");
}

const char* dtype_name(uot::Dtype d) { return d == uot::Dtype::f32 ? "fp32" : "fp64"; }

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw uot::IoError("cannot open output file " + out_path);
  out << text;
}

struct ProblemSource {
  std::string in_path;
  std::uint64_t seed = 1;
  std::size_t m = 64, n = 64;
  std::string dtype = "fp64";

  uot::AnyProblem load() const {
    if (!in_path.empty()) return uot::read_problem(in_path);
    return uot::gen_problem(seed, m, n, parse_dtype(dtype));
  }
};

struct TileFlags {
  std::size_t tx2 = 0, ty2 = 0, ny2 = 0;  // 0 = keep default
  std::size_t tx4 = 0, ny4 = 0;

  uot::TileConfig part2(std::size_t m, std::size_t n) const {
    uot::TileConfig cfg = uot::default_part2_config(m, n);
    if (tx2) cfg.tx = tx2;
    if (ty2) cfg.ty = ty2;
    if (ny2) cfg.ny = ny2;
    cfg.bx = (n + cfg.tx - 1) / cfg.tx;
    cfg.by = (m + cfg.ty * cfg.ny - 1) / (cfg.ty * cfg.ny);
    return cfg;
  }
  uot::TileConfig part4(std::size_t m, std::size_t n) const {
    uot::TileConfig cfg = uot::default_part4_config(m, n);
    if (tx4) cfg.tx = tx4;
    if (ny4) cfg.ny = ny4;
    cfg.bx = (n + cfg.tx - 1) / cfg.tx;
    cfg.by = (m + cfg.ny - 1) / cfg.ny;
    return cfg;
  }
};

struct SolveOutcome {
  uot::SolveReport report;
  std::size_t workers = 1;
  std::size_t ranks = 1;
};

template <typename T>
SolveOutcome run_solver(const uot::Problem<T>& p, const std::string& solver, std::size_t workers,
                        std::size_t ranks, double tol, std::size_t max_iter,
                        const TileFlags& tiles) {
  SolveOutcome out;
  if (solver == "baseline") {
    out.report = uot::baseline_solve(p, tol, max_iter).report;
  } else if (solver == "fused") {
    out.report = uot::fused_solve(p, tol, max_iter, std::size_t(1)).report;
  } else if (solver == "parallel") {
    out.workers = workers;
    out.report = uot::fused_solve(p, tol, max_iter, workers).report;
  } else if (solver == "tiled") {
    out.report =
        uot::tiled_solve(p, tol, max_iter, tiles.part2(p.m(), p.n()), tiles.part4(p.m(), p.n()))
            .report;
  } else if (solver == "dist") {
    out.ranks = ranks;
    out.report = uot::distributed_solve(p, tol, max_iter, ranks).report;
  } else {
    throw uot::InvalidParameter("unknown solver '" + solver + "'");
  }
  return out;
}

json report_json(const SolveOutcome& o, std::size_t m, std::size_t n, uot::Dtype dt) {
  return json{{"solver", o.report.solver},
              {"M", m},
              {"N", n},
              {"dtype", dtype_name(dt)},
              {"workers", o.workers},
              {"ranks", o.ranks},
              {"iterations", o.report.iterations},
              {"final_error", o.report.final_error},
              {"converged", o.report.converged},
              {"wall_ms", o.report.wall_ms}};
}

template <typename T>
json verify_impl(const uot::Problem<T>& p, std::size_t iters, std::size_t workers,
                 std::size_t ranks, double tol) {
  const double fi = uot::compute_fi(p.er, p.ep);

  uot::Matrix<T> base = p.a;
  for (std::size_t it = 0; it < iters; ++it) uot::baseline_iterate(base, p, fi);

  uot::Matrix<T> fused = p.a;
  {
    uot::FusedState st{uot::init_col_sums(fused)};
    for (std::size_t it = 0; it < iters; ++it) uot::fused_iterate(fused, st, p, fi);
  }

  uot::Matrix<T> par = p.a;
  {
    const uot::WorkerPlan plan = uot::WorkerPlan::make(workers, p.m(), p.n());
    uot::FusedState st{uot::init_col_sums(par)};
    for (std::size_t it = 0; it < iters; ++it) uot::fused_iterate_parallel(par, st, p, fi, plan);
  }

  uot::Matrix<T> tiled = p.a;
  {
    uot::FusedState st{uot::init_col_sums(tiled)};
    for (std::size_t it = 0; it < iters; ++it) uot::tiled_iterate(tiled, st, p, fi);
  }

  const std::size_t eff_ranks = std::min(ranks, p.m());
  const uot::Matrix<T> dist = uot::distributed_solve(p, kNeverTol, iters, eff_ranks).plan;

  const double d_fused = uot::max_abs_diff(base, fused);
  const double d_par = uot::max_abs_diff(base, par);
  const double d_tiled = uot::max_abs_diff(base, tiled);
  const double d_dist = uot::max_abs_diff(base, dist);
  const double d_max = std::max({d_fused, d_par, d_tiled, d_dist});

  return json{{"iterations", iters},
              {"workers", workers},
              {"ranks", eff_ranks},
              {"diff_vs_baseline",
               {{"fused", d_fused}, {"parallel", d_par}, {"tiled", d_tiled}, {"dist", d_dist}}},
              {"max_diff", d_max},
              {"tolerance", tol},
              {"ok", d_max <= tol}};
}

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic unbalanced-transport solver kit"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate a deterministic random problem file");
  ProblemSource gen_src;
  std::string gen_out;
  gen->add_option("--seed", gen_src.seed, "RNG seed")->capture_default_str();
  gen->add_option("--m", gen_src.m, "rows")->capture_default_str();
  gen->add_option("--n", gen_src.n, "columns")->capture_default_str();
  gen->add_option("--dtype", gen_src.dtype, "fp32 or fp64")->capture_default_str();
  gen->add_option("--out", gen_out, "output file")->required();

  // --- solve ---
  auto* solve = app.add_subcommand("solve", "Solve one problem and report JSON");
  ProblemSource solve_src;
  std::string solve_solver = "fused", solve_out;
  std::size_t solve_workers = 4, solve_ranks = 2, solve_max_iter = 10000;
  double solve_tol = 1e-6;
  TileFlags solve_tiles;
  solve->add_option("--in", solve_src.in_path, "problem file (overrides --seed/--m/--n/--dtype)");
  solve->add_option("--seed", solve_src.seed, "RNG seed")->capture_default_str();
  solve->add_option("--m", solve_src.m, "rows")->capture_default_str();
  solve->add_option("--n", solve_src.n, "columns")->capture_default_str();
  solve->add_option("--dtype", solve_src.dtype, "fp32 or fp64")->capture_default_str();
  solve->add_option("--solver", solve_solver, "baseline|fused|parallel|tiled|dist")
      ->capture_default_str();
  solve->add_option("--workers", solve_workers, "worker threads for --solver parallel")
      ->envname("UOT_THREADS")
      ->capture_default_str();
  solve->add_option("--ranks", solve_ranks, "simulated ranks for --solver dist")
      ->capture_default_str();
  solve->add_option("--tol", solve_tol, "convergence tolerance on max |factor - 1|")
      ->capture_default_str();
  solve->add_option("--max-iter", solve_max_iter, "iteration cap")->capture_default_str();
  solve->add_option("--tx2", solve_tiles.tx2, "tiled: row-factor kernel block width");
  solve->add_option("--ty2", solve_tiles.ty2, "tiled: row-factor kernel block height");
  solve->add_option("--ny2", solve_tiles.ny2, "tiled: row-factor kernel rows per lane");
  solve->add_option("--tx4", solve_tiles.tx4, "tiled: column-factor kernel block width");
  solve->add_option("--ny4", solve_tiles.ny4, "tiled: column-factor kernel rows per block");
  solve->add_option("--out", solve_out, "write the JSON report here instead of stdout");

  // --- verify ---
  auto* verify = app.add_subcommand(
      "verify", "Run every solver for a fixed iteration count and compare the plans");
  ProblemSource verify_src;
  std::size_t verify_iters = 25, verify_workers = 4, verify_ranks = 3;
  double verify_tol = 1e-10;
  std::string verify_out;
  verify->add_option("--seed", verify_src.seed, "RNG seed")->capture_default_str();
  verify->add_option("--m", verify_src.m, "rows")->capture_default_str();
  verify->add_option("--n", verify_src.n, "columns")->capture_default_str();
  verify->add_option("--dtype", verify_src.dtype, "fp32 or fp64")->capture_default_str();
  verify->add_option("--iters", verify_iters, "iterations per solver")->capture_default_str();
  verify->add_option("--workers", verify_workers, "threads for the parallel solver")
      ->envname("UOT_THREADS")
      ->capture_default_str();
  verify->add_option("--ranks", verify_ranks, "ranks for the distributed solver (clamped to M)")
      ->capture_default_str();
  verify->add_option("--tol", verify_tol, "max allowed element difference")->capture_default_str();
  verify->add_option("--out", verify_out, "write the JSON report here instead of stdout");

  // --- bench ---
  auto* bench = app.add_subcommand("bench", "Time solver iterations over square sizes (CSV)");
  std::vector<std::size_t> bench_sizes{256, 512, 1024};
  std::vector<std::string> bench_solvers{"baseline", "fused"};
  std::size_t bench_iters = 10, bench_workers = 4, bench_ranks = 2;
  std::uint64_t bench_seed = 1;
  std::string bench_dtype = "fp32", bench_out;
  bench->add_option("--sizes", bench_sizes, "square sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--solvers", bench_solvers, "solvers to time")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--iters", bench_iters, "iterations per run")->capture_default_str();
  bench->add_option("--workers", bench_workers, "threads for the parallel solver")
      ->envname("UOT_THREADS")
      ->capture_default_str();
  bench->add_option("--ranks", bench_ranks, "ranks for the distributed solver")
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "RNG seed")->capture_default_str();
  bench->add_option("--dtype", bench_dtype, "fp32 or fp64")->capture_default_str();
  bench->add_option("--out", bench_out, "write the CSV here instead of stdout");

  // --- traffic ---
  auto* traffic =
      app.add_subcommand("traffic", "Modeled bytes per iteration vs simulated cache traffic (CSV)");
  std::size_t traffic_m = 1024, traffic_n = 1024;
  std::string traffic_dtype = "fp32", traffic_out;
  std::uint64_t traffic_capacity = 256 * 1024, traffic_line = 64;
  traffic->add_option("--m", traffic_m, "rows")->capture_default_str();
  traffic->add_option("--n", traffic_n, "columns")->capture_default_str();
  traffic->add_option("--dtype", traffic_dtype, "fp32 or fp64")->capture_default_str();
  traffic->add_option("--capacity", traffic_capacity, "cache capacity in bytes")
      ->capture_default_str();
  traffic->add_option("--line", traffic_line, "cache line in bytes")->capture_default_str();
  traffic->add_option("--out", traffic_out, "write the CSV here instead of stdout");

  // --- roofline ---
  auto* roofline = app.add_subcommand("roofline", "Attainable-performance curve (CSV)");
  double roof_peak = 793.6e9, roof_bw = 76.8e9, roof_imin = 1.0 / 64, roof_imax = 1024.0;
  std::size_t roof_points = 65;
  std::string roof_machine, roof_out;
  roofline->add_option("--peak-flops", roof_peak, "peak FLOP/s")->capture_default_str();
  roofline->add_option("--bandwidth", roof_bw, "memory bandwidth, bytes/s")->capture_default_str();
  roofline->add_option("--machine", roof_machine, "preset: desktop-cpu | discrete-gpu");
  roofline->add_option("--imin", roof_imin, "lowest intensity")->capture_default_str();
  roofline->add_option("--imax", roof_imax, "highest intensity")->capture_default_str();
  roofline->add_option("--points", roof_points, "sample count")->capture_default_str();
  roofline->add_option("--out", roof_out, "write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen)) {
      uot::write_problem(gen_out,
                         uot::gen_problem(gen_src.seed, gen_src.m, gen_src.n,
                                          parse_dtype(gen_src.dtype)));
      return 0;
    }

    if (app.got_subcommand(solve)) {
      const uot::AnyProblem any = solve_src.load();
      const SolveOutcome outcome = std::visit(
          [&](const auto& p) {
            return run_solver(p, solve_solver, solve_workers, solve_ranks, solve_tol,
                              solve_max_iter, solve_tiles);
          },
          any);
      emit(report_json(outcome, uot::problem_rows(any), uot::problem_cols(any),
                       uot::problem_dtype(any))
                   .dump(2) +
               "\n",
           solve_out);
      return outcome.report.converged ? 0 : 2;
    }

    if (app.got_subcommand(verify)) {
      const uot::AnyProblem any = verify_src.load();
      const json rep = std::visit(
          [&](const auto& p) {
            return verify_impl(p, verify_iters, verify_workers, verify_ranks, verify_tol);
          },
          any);
      emit(rep.dump(2) + "\n", verify_out);
      return rep.at("ok").get<bool>() ? 0 : 2;
    }

    if (app.got_subcommand(bench)) {
      const uot::Dtype dt = parse_dtype(bench_dtype);
      std::ostringstream csv;
      csv << "M,N,solver,workers,iterations,wall_ms,bytes_modeled\n";
      for (const std::size_t size : bench_sizes) {
        const uot::AnyProblem any = uot::gen_problem(bench_seed, size, size, dt);
        for (const std::string& solver : bench_solvers) {
          const SolveOutcome o = std::visit(
              [&](const auto& p) {
                return run_solver(p, solver, bench_workers, bench_ranks, kNeverTol, bench_iters,
                                  TileFlags{});
              },
              any);
          const uot::Variant family =
              solver == "baseline" ? uot::Variant::baseline : uot::Variant::fused;
          const std::uint64_t bytes =
              uot::traffic_model(size, size, uot::dtype_bytes(dt), family).total_bytes *
              o.report.iterations;
          const std::size_t lanes = std::max(o.workers, o.ranks);
          csv << size << ',' << size << ',' << o.report.solver << ',' << lanes << ','
              << o.report.iterations << ',' << csv_double(o.report.wall_ms) << ',' << bytes
              << '\n';
        }
      }
      emit(csv.str(), bench_out);
      return 0;
    }

    if (app.got_subcommand(traffic)) {
      const std::size_t b = uot::dtype_bytes(parse_dtype(traffic_dtype));
      const uot::CacheConfig cfg{traffic_capacity, traffic_line};
      std::ostringstream csv;
      csv << "variant,model_bytes,sim_dram_bytes,sim_accesses,sim_misses,sim_miss_rate\n";
      for (const uot::Variant v : {uot::Variant::baseline, uot::Variant::fused}) {
        const uot::TrafficReport model = uot::traffic_model(traffic_m, traffic_n, b, v);
        const uot::CacheStats sim = uot::simulate_cache(v, traffic_m, traffic_n, b, cfg);
        csv << uot::variant_name(v) << ',' << model.total_bytes << ',' << sim.dram_bytes << ','
            << sim.accesses << ',' << sim.misses << ',' << csv_double(sim.miss_rate) << '\n';
      }
      emit(csv.str(), traffic_out);
      return 0;
    }

    if (app.got_subcommand(roofline)) {
      uot::MachineSpec machine{"custom", roof_peak, roof_bw};
      if (roof_machine == "desktop-cpu") machine = {"desktop-cpu", 793.6e9, 76.8e9};
      else if (roof_machine == "discrete-gpu") machine = {"discrete-gpu", 40e12, 1008e9};
      else if (!roof_machine.empty())
        throw uot::InvalidParameter("unknown machine preset '" + roof_machine + "'");
      std::ostringstream csv;
      csv << "intensity,attainable_flops\n";
      for (const auto& [i, flops] : uot::roofline_curve(machine, roof_imin, roof_imax, roof_points))
        csv << csv_double(i) << ',' << csv_double(flops) << '\n';
      emit(csv.str(), roof_out);
      return 0;
    }
  } catch (const uot::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
