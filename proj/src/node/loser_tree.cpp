#include "shardex/node/loser_tree.hpp"

#include <bit>

#include "shardex/error.hpp"

namespace shardex::node {

namespace {

class Tournament {
 public:
  Tournament(std::span<const MergeStream> streams, MergeCounters& counters)
      : streams_(streams), counters_(counters), leaves_(std::bit_ceil(std::max<std::size_t>(streams.size(), 1))),
        pos_(streams.size(), 0), losers_(leaves_, kNone) {
    winner_ = build(1, counters_.buildComparisons);
  }

  bool exhausted() const { return !live(winner_); }

  const RankedItem& top() const { return current(winner_); }
  std::uint32_t top_source() const { return streams_[winner_].source; }

  // Advances the winning stream and replays its path to the root.
  std::uint64_t pop() {
    ++pos_[winner_];
    std::size_t candidate = winner_;
    std::uint64_t comparisons = 0;
    for (std::size_t node = (winner_ + leaves_) / 2; node >= 1; node /= 2) {
      ++comparisons;
      if (beats(losers_[node], candidate)) std::swap(losers_[node], candidate);
    }
    winner_ = candidate;
    return comparisons;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool live(std::size_t s) const { return s != kNone && s < streams_.size() && pos_[s] < streams_[s].items.size(); }
  const RankedItem& current(std::size_t s) const { return streams_[s].items[pos_[s]]; }

  bool beats(std::size_t a, std::size_t b) const {
    if (!live(a)) return false;
    if (!live(b)) return true;
    const auto& x = current(a);
    const auto& y = current(b);
    if (x.rank != y.rank) return x.rank > y.rank;
    if (streams_[a].source != streams_[b].source) return streams_[a].source < streams_[b].source;
    return x.docKey < y.docKey;
  }

  std::size_t build(std::size_t node, std::uint64_t& comparisons) {
    if (node >= leaves_) return node - leaves_;
    const std::size_t l = build(2 * node, comparisons);
    const std::size_t r = build(2 * node + 1, comparisons);
    ++comparisons;
    if (beats(r, l)) {
      losers_[node] = l;
      return r;
    }
    losers_[node] = r;
    return l;
  }

  std::span<const MergeStream> streams_;
  MergeCounters& counters_;
  std::size_t leaves_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> losers_;  // index 1..leaves_-1
  std::size_t winner_ = kNone;
};

}  // namespace

std::uint32_t tree_height(std::size_t n) {
  if (n <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

std::vector<MergedItem> loser_tree_merge(std::span<const MergeStream> streams, std::size_t k,
                                         MergeCounters* counters) {
  for (const auto& s : streams) {
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      if (s.items[i].rank > s.items[i - 1].rank) {
        throw ContractViolation("merge stream from source " + std::to_string(s.source) + " rises in rank at position " +
                                std::to_string(i));
      }
    }
  }
  MergeCounters local;
  MergeCounters& c = counters ? *counters : local;
  c = {};
  std::vector<MergedItem> out;
  if (streams.empty() || k == 0) return out;

  Tournament t(streams, c);
  while (!t.exhausted()) {
    out.push_back({t.top().docKey, t.top().rank, t.top_source()});
    ++c.emitted;
    if (out.size() == k) break;
    const auto replay = t.pop();
    c.replayComparisons += replay;
    c.maxReplayPerItem = std::max(c.maxReplayPerItem, replay);
  }
  return out;
}

}  // namespace shardex::node
