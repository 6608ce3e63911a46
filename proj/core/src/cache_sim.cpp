#include "uot/cache_sim.hpp"

#include <algorithm>
#include <array>

#include "uot/baseline.hpp"
#include "uot/error.hpp"
#include "uot/fused.hpp"
#include "uot/trace.hpp"

namespace uot {

namespace {

bool power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Region slabs laid out back to back, each starting on a line boundary.
struct Layout {
  std::array<std::uint64_t, kRegionCount> base{};
  std::array<std::uint64_t, kRegionCount> elem_bytes{};
  std::uint64_t total_lines = 0;

  Layout(std::size_t m, std::size_t n, std::size_t matrix_elem_bytes, std::uint64_t line) {
    const std::array<std::uint64_t, kRegionCount> counts = {
        std::uint64_t(m) * n,  // matrix
        m,                     // row_marginal
        n,                     // col_marginal
        m,                     // factor_row
        n,                     // factor_col
        n,                     // col_sums
        m,                     // row_sums
    };
    std::uint64_t cursor = 0;
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      elem_bytes[r] = (r == 0) ? matrix_elem_bytes : 8;
      base[r] = cursor;
      const std::uint64_t bytes = counts[r] * elem_bytes[r];
      cursor += (bytes + line - 1) / line * line;
    }
    total_lines = cursor / line;
  }
};

class LruCache {
 public:
  LruCache(std::uint64_t capacity_lines, std::uint64_t total_lines)
      : cap_(capacity_lines), table_(total_lines, -1) {
    nodes_.reserve(std::min<std::uint64_t>(cap_, total_lines));
  }

  // Returns true on a miss (which always allocates the line).
  bool access(std::uint64_t line, bool is_store) {
    const std::int64_t found = table_[line];
    if (found >= 0) {
      touch(std::int32_t(found));
      nodes_[found].dirty |= is_store;
      return false;
    }
    ++misses_;
    std::int32_t idx;
    if (nodes_.size() < cap_) {
      idx = std::int32_t(nodes_.size());
      nodes_.push_back(Node{line, -1, -1, is_store});
    } else {
      idx = tail_;
      Node& victim = nodes_[idx];
      table_[victim.line] = -1;
      if (victim.dirty) ++writebacks_;
      detach(idx);
      victim = Node{line, -1, -1, is_store};
    }
    push_front(idx);
    table_[line] = idx;
    return true;
  }

  std::uint64_t misses() const { return misses_; }
  std::uint64_t writebacks() const { return writebacks_; }

  // End of run: every resident dirty line still has to reach memory.
  void flush() {
    for (const Node& nd : nodes_)
      if (nd.dirty) ++writebacks_;
  }

 private:
  struct Node {
    std::uint64_t line;
    std::int32_t prev, next;
    bool dirty;
  };

  void detach(std::int32_t idx) {
    Node& nd = nodes_[idx];
    if (nd.prev >= 0) nodes_[nd.prev].next = nd.next; else head_ = nd.next;
    if (nd.next >= 0) nodes_[nd.next].prev = nd.prev; else tail_ = nd.prev;
  }
  void push_front(std::int32_t idx) {
    Node& nd = nodes_[idx];
    nd.prev = -1;
    nd.next = head_;
    if (head_ >= 0) nodes_[head_].prev = idx;
    head_ = idx;
    if (tail_ < 0) tail_ = idx;
  }
  void touch(std::int32_t idx) {
    if (head_ == idx) return;
    detach(idx);
    push_front(idx);
  }

  std::uint64_t cap_;
  std::vector<std::int64_t> table_;
  std::vector<Node> nodes_;
  std::int32_t head_ = -1, tail_ = -1;
  std::uint64_t misses_ = 0, writebacks_ = 0;
};

// Feeds every traced element access straight into the LRU model.
struct ReplayTrace {
  static constexpr bool enabled = true;

  LruCache& cache;
  const Layout& layout;
  std::uint64_t line_bytes;
  std::uint64_t accesses = 0;
  std::vector<CachePhase> phases;

  void hit_or_miss(Region r, std::size_t index, bool is_store) {
    const std::size_t ri = std::size_t(r);
    const std::uint64_t addr = layout.base[ri] + std::uint64_t(index) * layout.elem_bytes[ri];
    const bool miss = cache.access(addr / line_bytes, is_store);
    ++accesses;
    if (!phases.empty()) {
      ++phases.back().accesses;
      if (miss) ++phases.back().misses;
    }
  }
  void load(Region r, std::size_t index) { hit_or_miss(r, index, false); }
  void store(Region r, std::size_t index) { hit_or_miss(r, index, true); }
  void begin_phase(std::string_view name) { phases.push_back({std::string(name), 0, 0}); }
};

template <typename T>
CacheStats simulate(Variant v, std::size_t m, std::size_t n, const CacheConfig& cfg) {
  // A fixed-point instance: all-ones matrix with its exact marginals, so one
  // replayed iteration cannot underflow or drift no matter the shape.
  Problem<T> p;
  p.a = Matrix<T>(m, n, T(1));
  p.rpd.assign(m, double(n));
  p.cpd.assign(n, double(m));
  p.er = p.ep = 1.0;
  const double fi = compute_fi(p.er, p.ep);

  const Layout layout(m, n, sizeof(T), cfg.line_bytes);
  LruCache cache(cfg.capacity_bytes / cfg.line_bytes, layout.total_lines);
  ReplayTrace tr{cache, layout, cfg.line_bytes, 0, {}};

  Matrix<T> a = p.a;
  if (v == Variant::baseline) {
    baseline_iterate(a, p, fi, tr);
  } else {
    FusedState state{init_col_sums(a)};  // carried from the previous iteration; not replayed
    fused_iterate(a, state, p, fi, tr);
  }
  cache.flush();

  CacheStats stats;
  stats.accesses = tr.accesses;
  stats.misses = cache.misses();
  stats.writebacks = cache.writebacks();
  stats.dram_bytes = (stats.misses + stats.writebacks) * cfg.line_bytes;
  stats.miss_rate = stats.accesses ? double(stats.misses) / double(stats.accesses) : 0.0;
  stats.phases = std::move(tr.phases);
  return stats;
}

}  // namespace

CacheStats simulate_cache(Variant v, std::size_t m, std::size_t n, std::size_t bytes_per_elem,
                          const CacheConfig& cfg) {
  if (m < 1 || n < 1) throw InvalidParameter("simulate_cache: matrix must be at least 1x1");
  if (bytes_per_elem != 4 && bytes_per_elem != 8)
    throw InvalidParameter("simulate_cache: element size must be 4 or 8 bytes");
  if (!power_of_two(cfg.line_bytes) || cfg.line_bytes < 8)
    throw InvalidParameter("simulate_cache: line size must be a power of two, at least 8");
  if (cfg.capacity_bytes < cfg.line_bytes)
    throw InvalidParameter("simulate_cache: capacity must hold at least one line");
  return bytes_per_elem == 4 ? simulate<float>(v, m, n, cfg) : simulate<double>(v, m, n, cfg);
}

}  // namespace uot
