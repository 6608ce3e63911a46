#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace uot {

struct MachineSpec {
  std::string label;
  double peak_flops = 0.0;           // FLOP/s
  double bandwidth_bytes = 0.0;      // bytes/s
};

enum class Variant { baseline, fused };

// Per-iteration memory-traffic model for one solver family, counting matrix
// bytes under an ideal cache: the reference solver moves each element six
// times (two sum sweeps, two load+store scale sweeps), the fused solver
// exactly twice (one load, one store). Both do the same arithmetic.
struct TrafficReport {
  Variant variant;
  std::uint64_t load_bytes = 0;
  std::uint64_t store_bytes = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t work_ops = 0;  // 6*M*N + 6*(M+N)
  double intensity = 0.0;      // work_ops / total_bytes
};

// FLOPs per byte of the fused iteration: (M*N + M + N) / (M*N*b).
// Approaches 1/b from above as the matrix grows.
double operational_intensity(std::size_t m, std::size_t n, std::size_t bytes_per_elem);

// Intensity at which a machine stops being bandwidth-bound: peak / bandwidth.
double ridge_point(const MachineSpec& machine);

// Roofline: min(peak, bandwidth * intensity).
double attainable_performance(const MachineSpec& machine, double intensity);

// Log-spaced (intensity, attainable_flops) samples from i_min to i_max inclusive.
std::vector<std::array<double, 2>> roofline_curve(const MachineSpec& machine, double i_min,
                                                  double i_max, std::size_t points);

TrafficReport traffic_model(std::size_t m, std::size_t n, std::size_t bytes_per_elem, Variant v);

const char* variant_name(Variant v);

}  // namespace uot
