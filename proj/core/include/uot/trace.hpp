#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uot {

// Memory regions a kernel can touch. Kernels report every logical element
// access (one load or one store of one element) against one of these, which is
// what the access-count checks, the ordering audit and the cache simulator consume.
enum class Region : std::uint8_t {
  matrix = 0,
  row_marginal,  // target row sums (RPD)
  col_marginal,  // target column sums (CPD)
  factor_row,    // alpha
  factor_col,    // beta
  col_sums,      // carried / freshly built column sums
  row_sums,      // per-pass row sums
};
inline constexpr std::size_t kRegionCount = 7;

// No-op trace: the default for production paths; everything inlines away.
struct NoTrace {
  static constexpr bool enabled = false;
  void load(Region, std::size_t) {}
  void store(Region, std::size_t) {}
  void begin_phase(std::string_view) {}
};

struct RegionCounters {
  std::array<std::uint64_t, kRegionCount> loads{};
  std::array<std::uint64_t, kRegionCount> stores{};

  std::uint64_t loads_of(Region r) const { return loads[std::size_t(r)]; }
  std::uint64_t stores_of(Region r) const { return stores[std::size_t(r)]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto v : loads) t += v;
    for (auto v : stores) t += v;
    return t;
  }
};

// Counts accesses per region, overall and per phase.
struct CountingTrace {
  static constexpr bool enabled = true;

  RegionCounters total;
  std::vector<std::pair<std::string, RegionCounters>> phases;

  void load(Region r, std::size_t) {
    ++total.loads[std::size_t(r)];
    if (!phases.empty()) ++phases.back().second.loads[std::size_t(r)];
  }
  void store(Region r, std::size_t) {
    ++total.stores[std::size_t(r)];
    if (!phases.empty()) ++phases.back().second.stores[std::size_t(r)];
  }
  void begin_phase(std::string_view name) { phases.emplace_back(std::string(name), RegionCounters{}); }
};

// Records the exact access sequence; used by ordering audits.
struct JournalTrace {
  static constexpr bool enabled = true;

  struct Entry {
    Region region;
    bool is_store;
    std::uint64_t index;  // flat element index within the region
  };
  std::vector<Entry> entries;

  void load(Region r, std::size_t i) { entries.push_back({r, false, i}); }
  void store(Region r, std::size_t i) { entries.push_back({r, true, i}); }
  void begin_phase(std::string_view) {}
};

}  // namespace uot
