#include "uot/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "uot/error.hpp"

namespace uot {

namespace {

void check_shape(std::size_t m, std::size_t n, std::size_t bytes_per_elem) {
  if (m < 1 || n < 1) throw InvalidParameter("traffic shape: matrix must be at least 1x1");
  if (bytes_per_elem != 4 && bytes_per_elem != 8)
    throw InvalidParameter("traffic shape: element size must be 4 or 8 bytes");
}

void check_machine(const MachineSpec& s) {
  if (!(s.peak_flops > 0.0) || !std::isfinite(s.peak_flops))
    throw InvalidParameter("machine: peak_flops must be positive and finite");
  if (!(s.bandwidth_bytes > 0.0) || !std::isfinite(s.bandwidth_bytes))
    throw InvalidParameter("machine: bandwidth must be positive and finite");
}

}  // namespace

double operational_intensity(std::size_t m, std::size_t n, std::size_t bytes_per_elem) {
  check_shape(m, n, bytes_per_elem);
  const double mn = double(m) * double(n);
  return (mn + double(m) + double(n)) / (mn * double(bytes_per_elem));
}

double ridge_point(const MachineSpec& machine) {
  check_machine(machine);
  return machine.peak_flops / machine.bandwidth_bytes;
}

double attainable_performance(const MachineSpec& machine, double intensity) {
  check_machine(machine);
  if (!(intensity > 0.0) || !std::isfinite(intensity))
    throw InvalidParameter("attainable_performance: intensity must be positive and finite");
  return std::min(machine.peak_flops, machine.bandwidth_bytes * intensity);
}

std::vector<std::array<double, 2>> roofline_curve(const MachineSpec& machine, double i_min,
                                                  double i_max, std::size_t points) {
  check_machine(machine);
  if (!(i_min > 0.0) || !(i_max > i_min)) throw InvalidParameter("roofline_curve: bad intensity range");
  if (points < 2) throw InvalidParameter("roofline_curve: need at least 2 points");
  std::vector<std::array<double, 2>> out;
  out.reserve(points);
  const double ratio = i_max / i_min;
  for (std::size_t k = 0; k < points; ++k) {
    const double i = i_min * std::pow(ratio, double(k) / double(points - 1));
    out.push_back({i, attainable_performance(machine, i)});
  }
  return out;
}

TrafficReport traffic_model(std::size_t m, std::size_t n, std::size_t bytes_per_elem, Variant v) {
  check_shape(m, n, bytes_per_elem);
  const std::uint64_t mn = std::uint64_t(m) * std::uint64_t(n);
  const std::uint64_t mnb = mn * bytes_per_elem;
  TrafficReport r;
  r.variant = v;
  if (v == Variant::baseline) {
    r.load_bytes = 4 * mnb;   // two sum sweeps + the loads of two scale sweeps
    r.store_bytes = 2 * mnb;  // the stores of two scale sweeps
  } else {
    r.load_bytes = mnb;  // each element read once...
    r.store_bytes = mnb; // ...and written once per iteration
  }
  r.total_bytes = r.load_bytes + r.store_bytes;
  r.work_ops = 6 * mn + 6 * (std::uint64_t(m) + std::uint64_t(n));
  r.intensity = double(r.work_ops) / double(r.total_bytes);
  return r;
}

const char* variant_name(Variant v) { return v == Variant::baseline ? "baseline" : "fused"; }

}  // namespace uot
