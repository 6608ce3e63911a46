#include "uot/distributed.hpp"
#include "uot/error.hpp"
#include "uot/fused.hpp"

namespace uot {

namespace {

// size M split into K contiguous blocks, sizes differing by at most one,
// remainder spread over the leading blocks.
std::vector<WorkerBlock> balanced_blocks(std::size_t k, std::size_t rows) {
  std::vector<WorkerBlock> blocks(k);
  const std::size_t base = rows / k, rem = rows % k;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t size = base + (w < rem ? 1 : 0);
    blocks[w] = {begin, begin + size};
    begin += size;
  }
  return blocks;
}

}  // namespace

WorkerPlan WorkerPlan::make(std::size_t workers, std::size_t rows, std::size_t cols) {
  if (workers < 1) throw InvalidParameter("WorkerPlan: need at least one worker");
  if (rows < 1 || cols < 1) throw InvalidParameter("WorkerPlan: matrix must be at least 1x1");
  WorkerPlan p;
  p.workers = workers;
  p.blocks = balanced_blocks(workers, rows);
  p.partial_stride = (cols + 7) / 8 * 8;  // pad to whole 64-byte lines of doubles
  return p;
}

RankPartition RankPartition::make(std::size_t ranks, std::size_t rows) {
  if (ranks < 1) throw PartitionError("RankPartition: need at least one rank");
  if (ranks > rows)
    throw PartitionError("RankPartition: " + std::to_string(ranks) + " ranks for " +
                         std::to_string(rows) + " rows would leave a rank without rows");
  RankPartition part;
  part.ranks = ranks;
  part.blocks = balanced_blocks(ranks, rows);
  return part;
}

}  // namespace uot
