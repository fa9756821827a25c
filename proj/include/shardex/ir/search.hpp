#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shardex/ir/index.hpp"
#include "shardex/types.hpp"

namespace shardex::ir {

// How a limited search evaluates its scope predicate.
enum class LimitedStrategy : std::uint8_t {
  embedded,   // one scan of the keyword list, filtering on the embedded attribute
  scopeJoin,  // zigzag join with the text-typed scope field's posting list
  automatic,  // embedded when the attribute is embedded, scope join otherwise
};

// Postings read while answering one query, summed over every cursor opened.
struct SearchStats {
  std::uint64_t visited = 0;
  std::uint64_t skipsTouched = 0;
};

// First min(k, count) postings of the keyword's list. Unknown keyword -> {}.
std::vector<TopKItem> search_single(const IndexReader& index, std::string_view keyword, std::uint32_t k,
                                    SearchStats* stats = nullptr);

// First k docIds present in every list, found by leapfrogging seek_geq calls.
// Requires at least two cursors.
std::vector<DocId> zigzag_join_ids(std::span<PostingCursor* const> cursors, std::uint32_t k);

std::vector<TopKItem> zigzag_join(std::span<PostingCursor* const> cursors, std::uint32_t k, const IndexReader& index);

// Conjunction of two or more keywords.
std::vector<TopKItem> search_multi(const IndexReader& index, std::span<const std::string> keywords, std::uint32_t k,
                                   SearchStats* stats = nullptr);

// Throws UnsupportedPredicateError when attr is not part of the embed spec.
std::vector<TopKItem> search_limited_embedded(const IndexReader& index, std::string_view keyword, ScopeAttr attr,
                                              std::int64_t value, std::uint32_t k, SearchStats* stats = nullptr);

std::vector<TopKItem> search_limited_join(const IndexReader& index, std::string_view keyword, ScopeAttr attr,
                                          std::int64_t value, std::uint32_t k, SearchStats* stats = nullptr);

// General entry point used by the query node: keywords (one or more) AND an
// optional scope predicate.
std::vector<TopKItem> search_conjunctive(const IndexReader& index, std::span<const std::string> keywords,
                                         const std::optional<ScopePredicate>& scope, std::uint32_t k,
                                         LimitedStrategy strategy = LimitedStrategy::automatic,
                                         SearchStats* stats = nullptr);

}  // namespace shardex::ir
