#include "shardex/ir/search.hpp"

#include <memory>

#include "shardex/error.hpp"

namespace shardex::ir {

namespace {

void require_k(std::uint32_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
}

std::vector<TopKItem> resolve(const IndexReader& index, const std::vector<DocId>& ids) {
  std::vector<TopKItem> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    const auto& d = index.doc(id);
    out.push_back({id, d.rank, d.docKey});
  }
  return out;
}

void accumulate(SearchStats* stats, const std::vector<std::unique_ptr<PostingCursor>>& cursors) {
  if (!stats) return;
  for (const auto& c : cursors) {
    if (!c) continue;
    stats->visited += c->stats().visited;
    stats->skipsTouched += c->stats().skipsTouched;
  }
}

// Optional filter on an embedded attribute of the first cursor's posting.
struct EmbeddedFilter {
  int slot = -1;
  std::int64_t value = 0;
  bool accepts(const Posting& p) const { return slot < 0 || p.embedded[static_cast<std::size_t>(slot)] == value; }
};

std::vector<DocId> scan_filtered(PostingCursor& cursor, std::uint32_t k, const EmbeddedFilter& filter) {
  std::vector<DocId> out;
  for (bool live = !cursor.exhausted(); live && out.size() < k; live = cursor.next()) {
    if (filter.accepts(cursor.current())) out.push_back(cursor.doc());
  }
  return out;
}

std::vector<DocId> leapfrog(std::span<PostingCursor* const> cursors, std::uint32_t k, const EmbeddedFilter& filter) {
  std::vector<DocId> out;
  const std::size_t n = cursors.size();
  for (auto* c : cursors) {
    if (c->exhausted()) return out;
  }
  if (n == 1) return scan_filtered(*cursors[0], k, filter);

  DocId target = cursors[0]->doc();
  std::size_t agreeing = 1;
  std::size_t i = 1;
  while (true) {
    PostingCursor& c = *cursors[i];
    if (!c.seek_geq(target)) break;
    if (c.doc() == target) {
      if (++agreeing == n) {
        // Every cursor sits on target.
        if (filter.accepts(cursors[0]->current())) {
          out.push_back(target);
          if (out.size() >= k) break;
        }
        if (!c.next()) break;
        target = c.doc();
        agreeing = 1;
      }
    } else {
      target = c.doc();
      agreeing = 1;
    }
    i = (i + 1) % n;
  }
  return out;
}

}  // namespace

std::vector<TopKItem> search_single(const IndexReader& index, std::string_view keyword, std::uint32_t k,
                                    SearchStats* stats) {
  require_k(k);
  std::vector<std::unique_ptr<PostingCursor>> cursors;
  cursors.push_back(index.open(Field::content, keyword));
  if (!cursors.back()) return {};
  auto ids = scan_filtered(*cursors.back(), k, {});
  accumulate(stats, cursors);
  return resolve(index, ids);
}

std::vector<DocId> zigzag_join_ids(std::span<PostingCursor* const> cursors, std::uint32_t k) {
  require_k(k);
  if (cursors.size() < 2) throw InvalidArgument("zigzag join needs at least two posting lists");
  return leapfrog(cursors, k, {});
}

std::vector<TopKItem> zigzag_join(std::span<PostingCursor* const> cursors, std::uint32_t k, const IndexReader& index) {
  return resolve(index, zigzag_join_ids(cursors, k));
}

std::vector<TopKItem> search_multi(const IndexReader& index, std::span<const std::string> keywords, std::uint32_t k,
                                   SearchStats* stats) {
  if (keywords.size() < 2) throw InvalidArgument("multi-keyword search needs at least two keywords");
  return search_conjunctive(index, keywords, std::nullopt, k, LimitedStrategy::automatic, stats);
}

std::vector<TopKItem> search_limited_embedded(const IndexReader& index, std::string_view keyword, ScopeAttr attr,
                                              std::int64_t value, std::uint32_t k, SearchStats* stats) {
  std::string kw(keyword);
  return search_conjunctive(index, std::span(&kw, 1), ScopePredicate{attr, value}, k, LimitedStrategy::embedded,
                            stats);
}

std::vector<TopKItem> search_limited_join(const IndexReader& index, std::string_view keyword, ScopeAttr attr,
                                          std::int64_t value, std::uint32_t k, SearchStats* stats) {
  std::string kw(keyword);
  return search_conjunctive(index, std::span(&kw, 1), ScopePredicate{attr, value}, k, LimitedStrategy::scopeJoin,
                            stats);
}

std::vector<TopKItem> search_conjunctive(const IndexReader& index, std::span<const std::string> keywords,
                                         const std::optional<ScopePredicate>& scope, std::uint32_t k,
                                         LimitedStrategy strategy, SearchStats* stats) {
  require_k(k);
  if (keywords.empty()) throw InvalidArgument("at least one keyword is required");

  EmbeddedFilter filter;
  bool joinScope = false;
  if (scope) {
    int slot = index.embed_slot(scope->attr);
    switch (strategy) {
      case LimitedStrategy::embedded:
        if (slot < 0) {
          throw UnsupportedPredicateError("attribute " + std::string(attr_name(scope->attr)) +
                                          " is not embedded in this index");
        }
        filter = {slot, scope->value};
        break;
      case LimitedStrategy::scopeJoin:
        joinScope = true;
        break;
      case LimitedStrategy::automatic:
        if (slot >= 0) {
          filter = {slot, scope->value};
        } else {
          joinScope = true;
        }
        break;
    }
  }

  std::vector<std::unique_ptr<PostingCursor>> owned;
  for (const auto& kw : keywords) {
    owned.push_back(index.open(Field::content, kw));
    if (!owned.back()) return {};
  }
  if (joinScope) {
    owned.push_back(index.open(scope_field(scope->attr), scope_term(scope->attr, scope->value)));
    if (!owned.back()) return {};
  }
  std::vector<PostingCursor*> cursors;
  for (auto& c : owned) cursors.push_back(c.get());

  auto ids = leapfrog(cursors, k, filter);
  accumulate(stats, owned);
  return resolve(index, ids);
}

}  // namespace shardex::ir
