#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shardex/types.hpp"

namespace shardex::node {

// One slave's reply, rank non-increasing.
struct MergeStream {
  std::uint32_t source = 0;
  std::span<const RankedItem> items;
};

struct MergedItem {
  std::string docKey;
  double rank = 0.0;
  std::uint32_t source = 0;

  friend bool operator==(const MergedItem&, const MergedItem&) = default;
};

struct MergeCounters {
  std::uint64_t buildComparisons = 0;   // initial tournament
  std::uint64_t replayComparisons = 0;  // leaf-to-root replays after each emit
  std::uint64_t emitted = 0;
  std::uint64_t maxReplayPerItem = 0;
};

// Height of the padded tree: ceil(log2 n), 0 for n <= 1.
std::uint32_t tree_height(std::size_t n);

// First k items across all streams, ordered by rank desc, then source asc,
// then docKey asc. Throws ContractViolation when a stream's rank increases.
std::vector<MergedItem> loser_tree_merge(std::span<const MergeStream> streams, std::size_t k,
                                         MergeCounters* counters = nullptr);

}  // namespace shardex::node
