#include "shardex/storage/buffer_pool.hpp"

#include <thread>

namespace shardex::storage {

BufferPool::BufferPool(PageLoader loader, std::uint64_t cacheBytes, std::chrono::microseconds missLatency)
    : loader_(std::move(loader)), cacheBytes_(cacheBytes), missLatency_(missLatency) {}

std::shared_ptr<const BufferPool::Page> BufferPool::fetch(std::uint64_t pageNo) {
  {
    std::lock_guard lock(mu_);
    if (tracing_) trace_.push_back(pageNo);
    auto it = frames_.find(pageNo);
    if (it != frames_.end()) {
      ++hits_;
      lru_.splice(lru_.begin(), lru_, it->second.lru);
      return it->second.page;
    }
    ++misses_;
  }

  auto page = std::make_shared<Page>();
  loader_(pageNo, *page);
  // Simulated device service time for a page that is not in the buffer.
  if (missLatency_.count() > 0) std::this_thread::sleep_for(missLatency_);

  std::lock_guard lock(mu_);
  auto it = frames_.find(pageNo);
  if (it != frames_.end()) {
    // Another reader loaded it meanwhile.
    lru_.splice(lru_.begin(), lru_, it->second.lru);
    return it->second.page;
  }
  std::shared_ptr<const Page> shared = std::move(page);
  insert_locked(pageNo, shared);
  return shared;
}

void BufferPool::insert_locked(std::uint64_t pageNo, std::shared_ptr<const Page> page) {
  const std::uint64_t size = page->size();
  if (size > cacheBytes_) return;
  while (resident_ + size > cacheBytes_) {
    auto victim = lru_.back();
    lru_.pop_back();
    auto vit = frames_.find(victim);
    resident_ -= vit->second.page->size();
    frames_.erase(vit);
    ++evictions_;
  }
  lru_.push_front(pageNo);
  frames_.emplace(pageNo, Frame{std::move(page), lru_.begin()});
  resident_ += size;
}

void BufferPool::reset_counters() {
  std::lock_guard lock(mu_);
  hits_ = misses_ = evictions_ = 0;
  trace_.clear();
}

void BufferPool::drop_cache() {
  std::lock_guard lock(mu_);
  frames_.clear();
  lru_.clear();
  resident_ = 0;
  hits_ = misses_ = evictions_ = 0;
  trace_.clear();
}

std::uint64_t BufferPool::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t BufferPool::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::uint64_t BufferPool::evictions() const {
  std::lock_guard lock(mu_);
  return evictions_;
}

std::uint64_t BufferPool::resident_bytes() const {
  std::lock_guard lock(mu_);
  return resident_;
}

void BufferPool::set_tracing(bool on) {
  std::lock_guard lock(mu_);
  tracing_ = on;
}

std::vector<std::uint64_t> BufferPool::trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

}  // namespace shardex::storage
