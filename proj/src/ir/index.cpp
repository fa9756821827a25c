#include "shardex/ir/index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include "shardex/error.hpp"

namespace shardex::ir {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<RankedDocument> assign_doc_ids(std::vector<Document> corpus) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(corpus.size());
  for (const auto& d : corpus) {
    if (!std::isfinite(d.rank)) throw InvalidArgument("non-finite rank for docKey " + d.docKey);
    if (!seen.insert(d.docKey).second) throw DuplicateKeyError(d.docKey);
  }
  std::sort(corpus.begin(), corpus.end(), [](const Document& a, const Document& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.docKey < b.docKey;
  });
  std::vector<RankedDocument> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.push_back({DocId{static_cast<std::uint32_t>(i)}, std::move(corpus[i])});
  }
  return out;
}

// --- PostingCursor ---------------------------------------------------------

void PostingCursor::start() {
  if (count_ == 0) return;
  // Every non-empty list has a sub-index entry for ordinal 0.
  current_ = &fetch_at(skips_.front());
  ++stats_.visited;
}

bool PostingCursor::next() {
  if (exhausted()) return false;
  ++pos_;
  if (exhausted()) return false;
  current_ = &fetch_next();
  ++stats_.visited;
  return true;
}

bool PostingCursor::seek_geq(DocId target) {
  if (exhausted()) return false;
  if (current_->docId >= target) return true;

  // Last sub-index entry at or below target, searching only entries not yet
  // passed by an earlier seek.
  std::size_t lo = skipPos_;
  std::size_t hi = skips_.size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    ++stats_.skipsTouched;
    if (skips_[mid].docId <= target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo > skipPos_) {
    const SkipEntry& entry = skips_[lo - 1];
    skipPos_ = lo;
    if (entry.ordinal > pos_) {
      pos_ = entry.ordinal;
      current_ = &fetch_at(entry);
      ++stats_.visited;
    }
  }
  while (current_->docId < target) {
    if (!next()) return false;
  }
  return true;
}

int IndexReader::embed_slot(ScopeAttr attr) const {
  auto spec = embed_spec();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec[i] == attr_name(attr)) return static_cast<int>(i);
  }
  return -1;
}

// --- In-memory index -------------------------------------------------------

namespace {

class MemoryCursor final : public PostingCursor {
 public:
  explicit MemoryCursor(const PostingList& list) : PostingCursor(list.skips, list.count()), list_(list) { start(); }

 protected:
  const Posting& fetch_next() override { return list_.postings[position()]; }
  const Posting& fetch_at(const SkipEntry& entry) override { return list_.postings[entry.ordinal]; }

 private:
  const PostingList& list_;
};

std::vector<std::string> validate_embed_spec(std::vector<std::string> spec) {
  std::set<std::string> seen;
  for (const auto& name : spec) {
    if (!attr_from_name(name)) throw InvalidArgument("cannot embed unknown attribute '" + name + "'");
    if (!seen.insert(name).second) throw InvalidArgument("attribute embedded twice: " + name);
  }
  return spec;
}

}  // namespace

std::unique_ptr<PostingCursor> open_list(const PostingList& list) { return std::make_unique<MemoryCursor>(list); }

std::unique_ptr<PostingCursor> IrIndex::open(Field field, std::string_view term) const {
  const auto& dict = dictionary(field);
  auto it = dict.find(term);
  if (it == dict.end()) return nullptr;
  return open_list(it->second);
}

IrIndex IrIndex::from_parts(std::vector<DocInfo> docs, std::vector<std::string> embedSpec, std::uint32_t skipInterval,
                            std::array<std::map<std::string, PostingList, std::less<>>, 3> dictionaries) {
  IrIndex idx;
  idx.docs_ = std::move(docs);
  idx.embedSpec_ = std::move(embedSpec);
  idx.skipInterval_ = skipInterval;
  idx.dictionaries_ = std::move(dictionaries);
  return idx;
}

void build_skips(PostingList& list, std::uint32_t skipInterval) {
  list.skips.clear();
  std::uint64_t offset = 0;
  for (std::uint32_t i = 0; i < list.postings.size(); ++i) {
    if (i % skipInterval == 0) list.skips.push_back({list.postings[i].docId, i, offset});
    offset += encoded_posting_size(list.postings[i]);
  }
}

IrIndex build_index(std::span<const RankedDocument> docs, std::vector<std::string> embedSpec,
                    std::uint32_t skipInterval) {
  if (skipInterval < 2) throw InvalidArgument("skip interval must be >= 2");
  IrIndex idx;
  idx.embedSpec_ = validate_embed_spec(std::move(embedSpec));
  idx.skipInterval_ = skipInterval;
  idx.docs_.reserve(docs.size());

  std::vector<ScopeAttr> embedAttrs;
  for (const auto& name : idx.embedSpec_) embedAttrs.push_back(*attr_from_name(name));

  auto& content = idx.dictionaries_[static_cast<std::size_t>(Field::content)];
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& rd = docs[i];
    if (rd.id.value != i) throw InvalidArgument("documents must be dense and in DocId order");
    const Document& d = rd.doc;
    idx.docs_.push_back({d.docKey, d.url, d.rank, d.siteId, d.domainId});

    std::vector<std::int64_t> embedded;
    embedded.reserve(embedAttrs.size());
    for (auto a : embedAttrs) embedded.push_back(a == ScopeAttr::siteId ? d.siteId : d.domainId);

    // token -> positions within this document
    std::map<std::string, std::vector<std::uint32_t>> occurrences;
    auto tokens = tokenize(d.content);
    for (std::uint32_t pos = 0; pos < tokens.size(); ++pos) occurrences[tokens[pos]].push_back(pos);
    for (auto& [tok, offs] : occurrences) {
      auto& list = content[tok];
      if (list.keyword.empty()) list.keyword = tok;
      list.postings.push_back({rd.id, std::move(offs), embedded});
    }

    for (auto attr : {ScopeAttr::siteId, ScopeAttr::domainId}) {
      auto term = scope_term(attr, attr == ScopeAttr::siteId ? d.siteId : d.domainId);
      auto& list = idx.dictionaries_[static_cast<std::size_t>(scope_field(attr))][term];
      if (list.keyword.empty()) list.keyword = term;
      list.postings.push_back({rd.id, {0}, embedded});
    }
  }
  for (auto& dict : idx.dictionaries_) {
    for (auto& [_, list] : dict) build_skips(list, skipInterval);
  }
  return idx;
}

}  // namespace shardex::ir
