#include "uot/distributed.hpp"
#include "uot/error.hpp"

namespace uot {

std::vector<double> allreduce_vectors(const std::vector<std::vector<double>>& partials) {
  if (partials.empty()) throw PartitionError("allreduce_vectors: no ranks");
  const std::size_t n = partials.front().size();
  for (const auto& v : partials)
    if (v.size() != n) throw InvalidParameter("allreduce_vectors: partial vector lengths differ");
  std::vector<double> out(n, 0.0);
  for (const auto& v : partials)  // ascending rank order
    for (std::size_t j = 0; j < n; ++j) out[j] += v[j];
  return out;
}

}  // namespace uot
