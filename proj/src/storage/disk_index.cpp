#include "shardex/storage/disk_index.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "format.hpp"
#include "shardex/error.hpp"

namespace shardex::storage {

// --- File ------------------------------------------------------------------

File File::open_read(const std::filesystem::path& path) {
  int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw IoError(path.string(), std::strerror(errno));
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    int err = errno;
    ::close(fd);
    throw IoError(path.string(), std::strerror(err));
  }
  return File(fd, static_cast<std::uint64_t>(st.st_size), path.string());
}

File::File(File&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), size_(other.size_), path_(std::move(other.path_)) {}

File& File::operator=(File&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    size_ = other.size_;
    path_ = std::move(other.path_);
  }
  return *this;
}

File::~File() {
  if (fd_ >= 0) ::close(fd_);
}

void File::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const {
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(path_, std::strerror(errno));
    }
    if (n == 0) throw IoError(path_, "unexpected end of file");
    done += static_cast<std::size_t>(n);
  }
}

// --- Cursor ----------------------------------------------------------------

namespace {

class DiskCursor final : public ir::PostingCursor {
 public:
  DiskCursor(const DiskIndex::ListRef& ref, BufferPool& pool, std::size_t embedCount)
      : PostingCursor(ref.skips, ref.count), ref_(ref), pool_(pool), embedCount_(embedCount) {
    start();
  }

 protected:
  const ir::Posting& fetch_next() override {
    return decode_at(offset_ + ir::encoded_posting_size(posting_));
  }
  const ir::Posting& fetch_at(const ir::SkipEntry& entry) override { return decode_at(entry.byteOffset); }

 private:
  const ir::Posting& decode_at(std::uint64_t listOffset) {
    offset_ = listOffset;
    const std::uint64_t base = ref_.postOffset + listOffset;
    scratch_.resize(8);
    read(base, scratch_);
    ByteReader head(scratch_);
    head.u32();
    const std::uint64_t nOffsets = head.u32();
    const std::uint64_t total = 8 + 4 * nOffsets + 8 * embedCount_;
    if (listOffset + total > ref_.postLength) throw CorruptIndexError("posting runs past its list");
    scratch_.resize(total);
    read(base + 8, std::span(scratch_).subspan(8));
    ByteReader r(scratch_);
    posting_ = detail::decode_posting(r, embedCount_);
    return posting_;
  }

  // Copies bytes at a POST-section offset, going through the pool for each
  // page not already held by this cursor.
  void read(std::uint64_t offset, std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
      const std::uint64_t at = offset + done;
      const std::uint64_t pageNo = at / kPageSize;
      if (!page_ || pageNo != pageNo_) {
        page_ = pool_.fetch(pageNo);
        pageNo_ = pageNo;
      }
      const std::size_t inPage = static_cast<std::size_t>(at % kPageSize);
      if (inPage >= page_->size()) throw CorruptIndexError("read past end of posting section");
      const std::size_t n = std::min(out.size() - done, page_->size() - inPage);
      std::memcpy(out.data() + done, page_->data() + inPage, n);
      done += n;
    }
  }

  DiskIndex::ListRef ref_;
  BufferPool& pool_;
  std::size_t embedCount_;
  std::shared_ptr<const BufferPool::Page> page_;
  std::uint64_t pageNo_ = 0;
  std::uint64_t offset_ = 0;
  std::vector<std::uint8_t> scratch_;
  ir::Posting posting_;
};

}  // namespace

// --- DiskIndex -------------------------------------------------------------

std::shared_ptr<DiskIndex> DiskIndex::load(const std::filesystem::path& path, DiskIndexOptions options) {
  return std::shared_ptr<DiskIndex>(new DiskIndex(File::open_read(path), options));
}

DiskIndex::DiskIndex(File file, DiskIndexOptions options) : file_(std::move(file)), options_(options) {
  const std::uint64_t size = file_.size();
  if (size < 12 + 8) throw CorruptIndexError(file_.path() + ": file too short");

  // Verify the checksum by streaming; only pinned sections are kept.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<std::uint8_t> chunk(1 << 16);
  for (std::uint64_t at = 0; at < size - 8; at += chunk.size()) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(chunk.size(), size - 8 - at));
    file_.read_at(at, std::span(chunk).first(n));
    h = fnv1a64(std::span(chunk).first(n), h);
  }
  std::uint8_t tail[8];
  file_.read_at(size - 8, tail);
  if (ByteReader(tail).u64() != h) throw CorruptIndexError(file_.path() + ": checksum mismatch");

  std::vector<std::uint8_t> header(static_cast<std::size_t>(std::min<std::uint64_t>(12 + 5 * 20, size - 8)));
  file_.read_at(0, header);
  detail::Layout layout;
  try {
    layout = detail::read_layout_header(header, size);
  } catch (const DecodeError&) {
    throw CorruptIndexError(file_.path() + ": truncated header");
  }
  summary_ = layout.summary;
  summary_.checksum = h;
  post_ = layout.post;

  if (summary_.pinnedBytes > options_.bufferBytes) {
    throw ConfigError("buffer of " + std::to_string(options_.bufferBytes) + " bytes cannot hold the " +
                      std::to_string(summary_.pinnedBytes) + " pinned bytes of " + file_.path());
  }

  auto read_section = [&](const Section& s) {
    std::vector<std::uint8_t> bytes(s.length);
    file_.read_at(s.offset, bytes);
    return bytes;
  };
  try {
    auto meta = detail::decode_meta(read_section(layout.meta));
    skipInterval_ = meta.skipInterval;
    embedSpec_ = std::move(meta.embedSpec);
    docs_ = detail::decode_docs(read_section(layout.docs), meta.docCount);
    auto dicts = detail::decode_dict(read_section(layout.dict));
    skips_ = detail::decode_skips(read_section(layout.skip));
    detail::validate_dictionaries(dicts, post_.length, skips_.size());
    for (std::size_t f = 0; f < dicts.size(); ++f) {
      auto& target = dictionaries_[f];
      target.reserve(dicts[f].size());
      for (auto& e : dicts[f]) {
        ListRef ref{e.postOffset, e.postLength, e.count,
                    std::span<const ir::SkipEntry>(skips_).subspan(e.skipStart, e.skipCount)};
        summary_.dictionaryEntries++;
        target.emplace(std::move(e.token), ref);
      }
    }
  } catch (const DecodeError& e) {
    throw CorruptIndexError(file_.path() + ": truncated section: " + e.what());
  }

  const std::uint64_t postBase = post_.offset;
  const std::uint64_t postLength = post_.length;
  const File* source = &file_;
  pool_ = std::make_unique<BufferPool>(
      [source, postBase, postLength](std::uint64_t pageNo, BufferPool::Page& out) {
        const std::uint64_t start = pageNo * kPageSize;
        if (start >= postLength) throw CorruptIndexError("page beyond posting section");
        out.resize(static_cast<std::size_t>(std::min<std::uint64_t>(kPageSize, postLength - start)));
        source->read_at(postBase + start, out);
      },
      options_.bufferBytes - summary_.pinnedBytes, options_.missLatency);
}

std::unique_ptr<ir::PostingCursor> DiskIndex::open(ir::Field field, std::string_view term) const {
  lookups_.fetch_add(1, std::memory_order_relaxed);
  const auto& dict = dictionaries_[static_cast<std::size_t>(field)];
  auto it = dict.find(std::string(term));
  if (it == dict.end()) return nullptr;
  return std::make_unique<DiskCursor>(it->second, *pool_, embedSpec_.size());
}

BufferStats DiskIndex::buffer_stats() const {
  BufferStats s;
  s.hits = pool_->hits();
  s.misses = pool_->misses();
  s.evictions = pool_->evictions();
  s.residentBytes = pool_->resident_bytes();
  s.pinnedBytes = summary_.pinnedBytes;
  s.capacityBytes = options_.bufferBytes;
  s.dictionaryLookups = lookups_.load(std::memory_order_relaxed);
  return s;
}

void DiskIndex::reset_counters() {
  pool_->reset_counters();
  lookups_.store(0, std::memory_order_relaxed);
}

void DiskIndex::drop_cache() {
  pool_->drop_cache();
  lookups_.store(0, std::memory_order_relaxed);
}

}  // namespace shardex::storage
