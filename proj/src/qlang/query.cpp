#include "shardex/qlang/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "shardex/error.hpp"

namespace shardex::qlang {

namespace {

bool is_token_text(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::isalnum(u);
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class Tok { word, number, string, lparen, rparen, comma, equals, semicolon, end };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::end, {}, start};
    const char c = src_[pos_];
    switch (c) {
      case '(': ++pos_; return {Tok::lparen, src_.substr(start, 1), start};
      case ')': ++pos_; return {Tok::rparen, src_.substr(start, 1), start};
      case ',': ++pos_; return {Tok::comma, src_.substr(start, 1), start};
      case '=': ++pos_; return {Tok::equals, src_.substr(start, 1), start};
      case ';': ++pos_; return {Tok::semicolon, src_.substr(start, 1), start};
      case '"': {
        auto close = src_.find('"', pos_ + 1);
        if (close == std::string_view::npos) throw ParseError(start, "unterminated string literal");
        pos_ = close + 1;
        return {Tok::string, src_.substr(start + 1, close - start - 1), start};
      }
      default: break;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (src_[start] == '-' && pos_ == start + 1) throw ParseError(start, "expected digits after '-'");
      return {Tok::number, src_.substr(start, pos_ - start), start};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      return {Tok::word, src_.substr(start, pos_ - start), start};
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  Query parse() {
    expect_word("SELECT");
    expect_word("TOP");
    const Token kTok = cur_;
    const std::int64_t k = number();
    if (k <= 0) throw ParseError(kTok.pos, "k must be >= 1");
    if (k > std::numeric_limits<std::uint32_t>::max()) throw ParseError(kTok.pos, "k too large");
    expect_word("WHERE");
    expect_word("MATCH");
    expect(Tok::lparen, "'('");
    expect_word("content");
    expect(Tok::comma, "','");

    std::vector<std::string> keywords;
    keywords.push_back(keyword());
    while (is_word("AND")) {
      advance();
      keywords.push_back(keyword());
    }
    expect(Tok::rparen, "')'");

    std::optional<ScopePredicate> scope;
    if (is_word("AND")) {
      advance();
      const Token field = cur_;
      ScopeAttr attr;
      if (is_word("siteId")) {
        attr = ScopeAttr::siteId;
      } else if (is_word("domainId")) {
        attr = ScopeAttr::domainId;
      } else {
        throw ParseError(field.pos, "expected siteId or domainId");
      }
      advance();
      expect(Tok::equals, "'='");
      scope = ScopePredicate{attr, number()};
    }
    if (cur_.kind == Tok::semicolon) advance();
    if (cur_.kind != Tok::end) throw ParseError(cur_.pos, "unexpected trailing input");

    Query q;
    q.keywords = std::move(keywords);
    q.scope = scope;
    q.k = static_cast<std::uint32_t>(k);
    q.type = scope ? ConditionType::limited : (q.keywords.size() == 1 ? ConditionType::single : ConditionType::multi);
    return q;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  bool is_word(std::string_view w) const {
    return cur_.kind == Tok::word && lower(cur_.text) == lower(w);
  }

  void expect_word(std::string_view w) {
    if (!is_word(w)) throw ParseError(cur_.pos, "expected " + std::string(w));
    advance();
  }

  void expect(Tok kind, std::string_view what) {
    if (cur_.kind != kind) throw ParseError(cur_.pos, "expected " + std::string(what));
    advance();
  }

  std::int64_t number() {
    if (cur_.kind != Tok::number) throw ParseError(cur_.pos, "expected integer");
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), v);
    if (ec != std::errc() || ptr != cur_.text.data() + cur_.text.size()) {
      throw ParseError(cur_.pos, "integer out of range");
    }
    advance();
    return v;
  }

  std::string keyword() {
    if (cur_.kind != Tok::string) throw ParseError(cur_.pos, "expected quoted keyword");
    if (cur_.text.empty()) throw ParseError(cur_.pos, "empty MATCH keyword");
    if (!is_token_text(cur_.text)) throw ParseError(cur_.pos, "keyword must be a single alphanumeric token");
    auto kw = lower(cur_.text);
    advance();
    return kw;
  }

  Lexer lex_;
  Token cur_{Tok::end, {}, 0};
};

}  // namespace

void validate(const Query& q) {
  if (q.k == 0) throw InvalidArgument("k must be >= 1");
  if (q.keywords.empty()) throw InvalidArgument("query needs at least one keyword");
  for (const auto& kw : q.keywords) {
    if (!is_token_text(kw) || lower(kw) != kw) throw InvalidArgument("keyword '" + kw + "' is not a lowercase token");
  }
  switch (q.type) {
    case ConditionType::single:
      if (q.keywords.size() != 1 || q.scope) throw InvalidArgument("single query needs one keyword and no scope");
      break;
    case ConditionType::multi:
      if (q.keywords.size() < 2 || q.scope) throw InvalidArgument("multi query needs two or more keywords and no scope");
      break;
    case ConditionType::limited:
      if (!q.scope) throw InvalidArgument("limited query needs a scope predicate");
      break;
    default:
      throw InvalidArgument("unknown condition type");
  }
}

Query make_query(std::vector<std::string> keywords, std::optional<ScopePredicate> scope, std::uint32_t k) {
  Query q;
  for (auto& kw : keywords) kw = lower(kw);
  q.type = scope ? ConditionType::limited : (keywords.size() == 1 ? ConditionType::single : ConditionType::multi);
  q.keywords = std::move(keywords);
  q.scope = scope;
  q.k = k;
  validate(q);
  return q;
}

Query parse_query(std::string_view text) { return Parser(text).parse(); }

std::string format_query(const Query& q) {
  std::string out = "SELECT TOP " + std::to_string(q.k) + " WHERE MATCH(content, ";
  for (std::size_t i = 0; i < q.keywords.size(); ++i) {
    if (i > 0) out += " AND ";
    out += '"' + q.keywords[i] + '"';
  }
  out += ')';
  if (q.scope) {
    out += " AND ";
    out += attr_name(q.scope->attr);
    out += " = " + std::to_string(q.scope->value);
  }
  return out;
}

}  // namespace shardex::qlang
