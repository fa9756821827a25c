#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shardex/types.hpp"

namespace shardex::ir {

struct Document {
  std::string docKey;
  std::string url;
  std::int64_t siteId = 0;
  std::int64_t domainId = 0;
  std::string content;
  double rank = 0.0;  // query-independent, higher is better
};

// Dense per-segment document number. Assigned in descending rank order, so
// ascending DocId order is also descending rank order.
struct DocId {
  std::uint32_t value = 0;
  friend auto operator<=>(DocId, DocId) = default;
};

struct RankedDocument {
  DocId id;
  Document doc;
};

// Lowercase and split on anything that is not an ASCII letter or digit.
std::vector<std::string> tokenize(std::string_view text);

// Sorts by rank descending (docKey ascending on ties) and numbers the
// documents 0..n-1. Throws DuplicateKeyError or InvalidArgument (non-finite
// rank).
std::vector<RankedDocument> assign_doc_ids(std::vector<Document> corpus);

// Index fields: the document content plus the two text-typed scope fields.
enum class Field : std::uint8_t { content = 0, siteIdText = 1, domainIdText = 2 };
inline constexpr Field kAllFields[] = {Field::content, Field::siteIdText, Field::domainIdText};

inline Field scope_field(ScopeAttr a) { return a == ScopeAttr::siteId ? Field::siteIdText : Field::domainIdText; }

struct Posting {
  DocId docId;
  std::vector<std::uint32_t> offsets;
  // One value per attribute of the index's embed spec, in spec order.
  std::vector<std::int64_t> embedded;

  friend bool operator==(const Posting&, const Posting&) = default;
};

// Sparse sub-index entry: every S-th posting of a list. byteOffset is the
// posting's position within the list's encoded form.
struct SkipEntry {
  DocId docId;
  std::uint32_t ordinal = 0;
  std::uint64_t byteOffset = 0;

  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

// Encoded posting size: u32 docId, u32 offset count, u32 offsets, i64 embedded values.
inline std::size_t encoded_posting_size(const Posting& p) {
  return 8 + 4 * p.offsets.size() + 8 * p.embedded.size();
}

struct PostingList {
  std::string keyword;
  std::vector<Posting> postings;
  std::vector<SkipEntry> skips;

  std::uint32_t count() const { return static_cast<std::uint32_t>(postings.size()); }
};

struct DocInfo {
  std::string docKey;
  std::string url;
  double rank = 0.0;
  std::int64_t siteId = 0;
  std::int64_t domainId = 0;

  friend bool operator==(const DocInfo&, const DocInfo&) = default;
};

struct TopKItem {
  DocId docId;
  double rank = 0.0;
  std::string docKey;

  friend bool operator==(const TopKItem&, const TopKItem&) = default;
};

struct CursorStats {
  std::uint64_t visited = 0;       // postings materialized
  std::uint64_t skipsTouched = 0;  // sub-index entries probed
};

// Forward iterator over one posting list with sub-index assisted seeking.
// Subclasses supply the storage access; the skip logic lives here.
class PostingCursor {
 public:
  PostingCursor(std::span<const SkipEntry> skips, std::uint32_t count) : skips_(skips), count_(count) {}
  virtual ~PostingCursor() = default;
  PostingCursor(const PostingCursor&) = delete;
  PostingCursor& operator=(const PostingCursor&) = delete;

  bool exhausted() const { return pos_ >= count_; }
  // Precondition: !exhausted().
  const Posting& current() const { return *current_; }
  DocId doc() const { return current_->docId; }
  std::uint32_t position() const { return pos_; }
  std::uint32_t count() const { return count_; }
  const CursorStats& stats() const { return stats_; }

  // Advances one posting. Returns false once exhausted.
  bool next();
  // Moves to the first posting with docId >= target. Never moves backward.
  // Returns false when no such posting exists.
  bool seek_geq(DocId target);

 protected:
  // Must be called by the subclass constructor once storage is ready.
  void start();
  // Materialize the posting directly after the current one.
  virtual const Posting& fetch_next() = 0;
  // Materialize the posting a sub-index entry points at.
  virtual const Posting& fetch_at(const SkipEntry& entry) = 0;

 private:
  std::span<const SkipEntry> skips_;
  std::uint32_t count_;
  std::uint32_t pos_ = 0;
  std::size_t skipPos_ = 0;  // first skip entry not yet passed
  const Posting* current_ = nullptr;
  CursorStats stats_;
};

// Read-only view over an index, in memory or on disk. Safe for concurrent
// readers; cursors are per-caller.
class IndexReader {
 public:
  virtual ~IndexReader() = default;

  // nullptr when the term has no posting list.
  virtual std::unique_ptr<PostingCursor> open(Field field, std::string_view term) const = 0;
  virtual const DocInfo& doc(DocId id) const = 0;
  virtual std::size_t doc_count() const = 0;
  virtual std::span<const std::string> embed_spec() const = 0;
  virtual std::uint32_t skip_interval() const = 0;

  // Index of attr within embed_spec(), or -1.
  int embed_slot(ScopeAttr attr) const;
};

inline constexpr std::uint32_t kDefaultSkipInterval = 128;

// The in-memory, immutable index produced by build_index.
class IrIndex final : public IndexReader {
 public:
  IrIndex() = default;

  std::unique_ptr<PostingCursor> open(Field field, std::string_view term) const override;
  const DocInfo& doc(DocId id) const override { return docs_.at(id.value); }
  std::size_t doc_count() const override { return docs_.size(); }
  std::span<const std::string> embed_spec() const override { return embedSpec_; }
  std::uint32_t skip_interval() const override { return skipInterval_; }

  const std::map<std::string, PostingList, std::less<>>& dictionary(Field f) const {
    return dictionaries_[static_cast<std::size_t>(f)];
  }
  const std::vector<DocInfo>& docs() const { return docs_; }

  // Assembles an index from already-built parts (used by the file loader).
  // Recomputes nothing; the caller vouches for the invariants.
  static IrIndex from_parts(std::vector<DocInfo> docs, std::vector<std::string> embedSpec, std::uint32_t skipInterval,
                            std::array<std::map<std::string, PostingList, std::less<>>, 3> dictionaries);

  friend IrIndex build_index(std::span<const RankedDocument> docs, std::vector<std::string> embedSpec,
                             std::uint32_t skipInterval);

 private:
  std::vector<DocInfo> docs_;
  std::vector<std::string> embedSpec_;
  std::uint32_t skipInterval_ = kDefaultSkipInterval;
  std::array<std::map<std::string, PostingList, std::less<>>, 3> dictionaries_;
};

// Builds content and scope-field posting lists. embedSpec names the
// attributes ("siteId", "domainId") copied into every posting. skipInterval
// must be >= 2. Documents must come from assign_doc_ids.
IrIndex build_index(std::span<const RankedDocument> docs, std::vector<std::string> embedSpec,
                    std::uint32_t skipInterval = kDefaultSkipInterval);

// Fills skips (and byte offsets) for a list whose postings are final.
void build_skips(PostingList& list, std::uint32_t skipInterval);

// Cursor over an in-memory list. The list must outlive the cursor.
std::unique_ptr<PostingCursor> open_list(const PostingList& list);

}  // namespace shardex::ir
