#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shardex {

// Search-condition type of a query.
enum class ConditionType : std::uint8_t { single = 1, multi = 2, limited = 3 };

// Structured attribute a limited search can be scoped to.
enum class ScopeAttr : std::uint8_t { siteId = 1, domainId = 2 };

struct ScopePredicate {
  ScopeAttr attr = ScopeAttr::siteId;
  std::int64_t value = 0;

  friend bool operator==(const ScopePredicate&, const ScopePredicate&) = default;
};

inline std::string_view to_string(ConditionType t) {
  switch (t) {
    case ConditionType::single: return "single";
    case ConditionType::multi: return "multi";
    case ConditionType::limited: return "limited";
  }
  return "?";
}

inline std::optional<ConditionType> condition_type_from_string(std::string_view s) {
  if (s == "single") return ConditionType::single;
  if (s == "multi") return ConditionType::multi;
  if (s == "limited") return ConditionType::limited;
  return std::nullopt;
}

// Attribute name as it appears in an embed spec and in query text.
inline std::string_view attr_name(ScopeAttr a) { return a == ScopeAttr::siteId ? "siteId" : "domainId"; }

inline std::optional<ScopeAttr> attr_from_name(std::string_view s) {
  if (s == "siteId") return ScopeAttr::siteId;
  if (s == "domainId") return ScopeAttr::domainId;
  return std::nullopt;
}

// Term under which a document is indexed in the text-typed scope field,
// e.g. "site:6000".
inline std::string scope_term(ScopeAttr a, std::int64_t value) {
  return std::string(a == ScopeAttr::siteId ? "site:" : "domain:") + std::to_string(value);
}

// A result element as it travels between nodes: the external key and the
// query-independent rank.
struct RankedItem {
  std::string docKey;
  double rank = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

}  // namespace shardex
