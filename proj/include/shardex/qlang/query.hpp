#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shardex/types.hpp"

namespace shardex::qlang {

// Canonical form of a user query.
//   single  <=> exactly one keyword, no scope
//   multi   <=> two or more keywords, no scope
//   limited <=> scope present (one or more keywords)
struct Query {
  ConditionType type = ConditionType::single;
  std::vector<std::string> keywords;  // lowercase tokens
  std::optional<ScopePredicate> scope;
  std::uint32_t k = 10;

  friend bool operator==(const Query&, const Query&) = default;
};

// Builds a Query with the condition type implied by its parts. Keywords are
// lowercased. Throws InvalidArgument when the result would be invalid.
Query make_query(std::vector<std::string> keywords, std::optional<ScopePredicate> scope, std::uint32_t k);

// Throws InvalidArgument naming the violated invariant.
void validate(const Query& q);

// SELECT TOP <k> WHERE MATCH(content, "<kw>" [AND "<kw>"]...)
//     [AND siteId = <int> | AND domainId = <int>]
// Reserved words and field names are case-insensitive. Throws ParseError.
Query parse_query(std::string_view text);

std::string format_query(const Query& q);

}  // namespace shardex::qlang
