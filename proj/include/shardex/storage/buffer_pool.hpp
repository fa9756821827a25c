#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace shardex::storage {

struct BufferStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t residentBytes = 0;  // cached posting pages only
  std::uint64_t pinnedBytes = 0;
  std::uint64_t capacityBytes = 0;  // total buffer budget, pinned included
  std::uint64_t dictionaryLookups = 0;

  friend bool operator==(const BufferStats&, const BufferStats&) = default;
};

// LRU cache of posting pages. Pages are sized individually (the last page of
// a section is short) and the budget is in bytes. Thread-safe.
class BufferPool {
 public:
  using Page = std::vector<std::uint8_t>;
  // Fills the page with its bytes; called without the pool lock held.
  using PageLoader = std::function<void(std::uint64_t pageNo, Page& out)>;

  BufferPool(PageLoader loader, std::uint64_t cacheBytes, std::chrono::microseconds missLatency = {});

  std::shared_ptr<const Page> fetch(std::uint64_t pageNo);

  // Counters only; cached pages stay.
  void reset_counters();
  // Evicts every cached page (not counted as evictions) and resets counters.
  void drop_cache();

  std::uint64_t cache_bytes() const { return cacheBytes_; }
  std::uint64_t hits() const;
  std::uint64_t misses() const;
  std::uint64_t evictions() const;
  std::uint64_t resident_bytes() const;

  // Page-request trace, recorded in request order while enabled.
  void set_tracing(bool on);
  std::vector<std::uint64_t> trace() const;

 private:
  struct Frame {
    std::shared_ptr<const Page> page;
    std::list<std::uint64_t>::iterator lru;
  };

  void insert_locked(std::uint64_t pageNo, std::shared_ptr<const Page> page);

  PageLoader loader_;
  const std::uint64_t cacheBytes_;
  const std::chrono::microseconds missLatency_;

  mutable std::mutex mu_;
  std::list<std::uint64_t> lru_;  // front = most recently used
  std::unordered_map<std::uint64_t, Frame> frames_;
  std::uint64_t resident_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t evictions_ = 0;
  bool tracing_ = false;
  std::vector<std::uint64_t> trace_;
};

}  // namespace shardex::storage
