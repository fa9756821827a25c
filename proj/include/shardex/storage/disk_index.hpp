#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "shardex/ir/index.hpp"
#include "shardex/storage/buffer_pool.hpp"
#include "shardex/storage/index_file.hpp"

namespace shardex::storage {

struct DiskIndexOptions {
  // Total budget: pinned sections plus the posting page cache.
  std::uint64_t bufferBytes = 0;
  // Added to every page miss to stand in for device service time.
  std::chrono::microseconds missLatency{0};
};

// Read-only POSIX file handle.
class File {
 public:
  static File open_read(const std::filesystem::path& path);
  File(File&& other) noexcept;
  File& operator=(File&& other) noexcept;
  File(const File&) = delete;
  File& operator=(const File&) = delete;
  ~File();

  std::uint64_t size() const { return size_; }
  // Reads exactly out.size() bytes at offset. Throws IoError.
  void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const;
  const std::string& path() const { return path_; }

 private:
  File(int fd, std::uint64_t size, std::string path) : fd_(fd), size_(size), path_(std::move(path)) {}
  int fd_ = -1;
  std::uint64_t size_ = 0;
  std::string path_;
};

// An index file opened in the semi-cold regime: dictionary, skip arrays and
// document table pinned in memory, posting pages read on demand through a
// bounded BufferPool.
class DiskIndex final : public ir::IndexReader {
 public:
  // Throws IoError, CorruptIndexError, or ConfigError when the pinned
  // sections alone exceed options.bufferBytes.
  static std::shared_ptr<DiskIndex> load(const std::filesystem::path& path, DiskIndexOptions options);

  std::unique_ptr<ir::PostingCursor> open(ir::Field field, std::string_view term) const override;
  const ir::DocInfo& doc(ir::DocId id) const override { return docs_.at(id.value); }
  std::size_t doc_count() const override { return docs_.size(); }
  std::span<const std::string> embed_spec() const override { return embedSpec_; }
  std::uint32_t skip_interval() const override { return skipInterval_; }

  BufferStats buffer_stats() const;
  void reset_counters();
  // Empties the posting page cache, leaving pinned structures in place.
  void drop_cache();
  BufferPool& pool() const { return *pool_; }
  const IndexFileSummary& summary() const { return summary_; }

  struct ListRef {
    std::uint64_t postOffset = 0;
    std::uint64_t postLength = 0;
    std::uint32_t count = 0;
    std::span<const ir::SkipEntry> skips;
  };

  DiskIndex(const DiskIndex&) = delete;
  DiskIndex& operator=(const DiskIndex&) = delete;

 private:
  DiskIndex(File file, DiskIndexOptions options);

  File file_;
  DiskIndexOptions options_;
  IndexFileSummary summary_;
  Section post_;
  std::uint32_t skipInterval_ = 0;
  std::vector<std::string> embedSpec_;
  std::vector<ir::DocInfo> docs_;
  std::vector<ir::SkipEntry> skips_;
  std::array<std::unordered_map<std::string, ListRef>, 3> dictionaries_;
  std::unique_ptr<BufferPool> pool_;
  mutable std::atomic<std::uint64_t> lookups_{0};
};

}  // namespace shardex::storage
