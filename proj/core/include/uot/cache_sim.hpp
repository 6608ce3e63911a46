#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uot/metrics.hpp"

namespace uot {

// Fully-associative LRU cache model: 64-byte lines by default, write-allocate,
// write-back. Checks the traffic model against the actual access streams.
struct CacheConfig {
  std::uint64_t capacity_bytes = 0;
  std::uint64_t line_bytes = 64;
};

struct CachePhase {
  std::string name;
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
};

struct CacheStats {
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;  // dirty evictions, plus the final flush
  std::uint64_t dram_bytes = 0;  // (misses + writebacks) * line_bytes
  double miss_rate = 0.0;
  std::vector<CachePhase> phases;
};

// Replays the element-access stream of exactly one iteration of the chosen
// solver family on an M x N problem (the fused variant starts from carried
// column sums, as it would mid-run) and returns what the cache saw. Matrix
// elements are bytes_per_elem wide; factor/marginal/sum vectors are doubles;
// every region sits in its own line-aligned slab of a virtual address space.
CacheStats simulate_cache(Variant v, std::size_t m, std::size_t n, std::size_t bytes_per_elem,
                          const CacheConfig& cfg);

}  // namespace uot
