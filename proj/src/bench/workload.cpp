#include "shardex/bench/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "shardex/error.hpp"
#include "shardex/ir/index.hpp"

namespace shardex::bench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T number(std::string_view text, std::string_view key) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = s.find(sep);
    auto part = trim(s.substr(0, pos));
    if (!part.empty()) out.push_back(part);
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

std::vector<std::int64_t> parse_ids(std::string_view value, std::string_view key) {
  std::vector<std::int64_t> out;
  for (auto part : split(value, ',')) {
    auto dash = part.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(number<std::int64_t>(part, key));
      continue;
    }
    auto lo = number<std::int64_t>(trim(part.substr(0, dash)), key);
    auto hi = number<std::int64_t>(trim(part.substr(dash + 1)), key);
    if (hi < lo) throw ConfigError(std::string(key) + ": empty range");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

template <class T>
void require_unique(const std::vector<T>& v, std::string_view what) {
  std::set<T> seen(v.begin(), v.end());
  if (seen.size() != v.size()) throw ConfigError(std::string(what) + " pool has duplicates");
}

template <class T>
T draw(std::vector<T>& pool, std::string_view what) {
  if (pool.empty()) throw ConfigError(std::string(what) + " pool exhausted");
  T v = std::move(pool.back());
  pool.pop_back();
  return v;
}

}  // namespace

void WorkloadSpec::validate() const {
  if (queryCount == 0) throw ConfigError("queries must be >= 1");
  if (repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (multiKeywords < 2) throw ConfigError("multi_keywords must be >= 2");
  if (!(lambdaQps > 0) || !std::isfinite(lambdaQps)) throw ConfigError("lambda_qps must be > 0");
  if (qmr.empty()) throw ConfigError("query mix is empty");
  double sum = 0;
  for (const auto& [key, v] : qmr) {
    if (!(v >= 0)) throw ConfigError("query mix ratios must be >= 0");
    if (key.second == 0) throw ConfigError("k must be >= 1");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("query mix ratios must sum to 1");
  require_unique(keywords, "keyword");
  require_unique(siteIds, "siteId");
  require_unique(domainIds, "domainId");
  for (const auto& kw : keywords) {
    auto toks = ir::tokenize(kw);
    if (toks.size() != 1 || toks[0] != kw) throw ConfigError("keyword '" + kw + "' is not a single lowercase token");
  }
}

WorkloadSpec WorkloadSpec::parse(std::string_view text, const std::filesystem::path& baseDir) {
  auto s = read(text, baseDir);
  s.validate();
  return s;
}

WorkloadSpec WorkloadSpec::read(std::string_view text, const std::filesystem::path& baseDir) {
  WorkloadSpec s;
  bool mixSeen = false;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("workload line " + std::to_string(lineNo) + ": expected key=value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key == "queries") s.queryCount = number<std::uint32_t>(value, key);
    else if (key == "seed") s.seed = number<std::uint64_t>(value, key);
    else if (key == "lambda_qps") s.lambdaQps = number<double>(value, key);
    else if (key == "repetitions") s.repetitions = number<std::uint32_t>(value, key);
    else if (key == "multi_keywords") s.multiKeywords = number<std::uint32_t>(value, key);
    else if (key == "keywords") {
      for (auto kw : split(value, ',')) s.keywords.emplace_back(kw);
    } else if (key == "keyword_file") {
      std::ifstream in(baseDir / std::string(value));
      if (!in) throw IoError((baseDir / std::string(value)).string(), "cannot open keyword file");
      std::string kw;
      while (std::getline(in, kw)) {
        auto t = trim(kw);
        if (!t.empty()) s.keywords.emplace_back(t);
      }
    } else if (key == "site_ids") {
      s.siteIds = parse_ids(value, key);
    } else if (key == "domain_ids") {
      s.domainIds = parse_ids(value, key);
    } else if (key.substr(0, 4) == "qmr.") {
      if (!mixSeen) s.qmr.clear();
      mixSeen = true;
      auto rest = key.substr(4);
      auto dot = rest.find('.');
      auto type = condition_type_from_string(rest.substr(0, dot));
      if (!type || dot == std::string_view::npos || rest.size() < dot + 3 || rest[dot + 1] != 'k') {
        throw ConfigError("bad mix key '" + std::string(key) + "'");
      }
      s.qmr[{*type, number<std::uint32_t>(rest.substr(dot + 2), key)}] = number<double>(value, key);
    } else {
      throw ConfigError("unknown workload key '" + std::string(key) + "'");
    }
  }
  return s;
}

WorkloadSpec WorkloadSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::map<model::MixKey, std::uint32_t> mix_counts(const std::map<model::MixKey, double>& qmr, std::uint32_t n) {
  std::map<model::MixKey, std::uint32_t> out;
  std::vector<std::pair<double, model::MixKey>> remainders;
  std::uint32_t assigned = 0;
  for (const auto& [key, ratio] : qmr) {
    const double exact = ratio * n;
    const auto whole = static_cast<std::uint32_t>(std::floor(exact));
    out[key] = whole;
    assigned += whole;
    remainders.push_back({exact - whole, key});
  }
  // Largest remainder first; map order breaks ties.
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i, ++assigned) ++out[remainders[i].second];
  return out;
}

namespace {

class Generator {
 public:
  explicit Generator(const WorkloadSpec& spec)
      : spec_(spec), rng_(spec.seed), keywords_(spec.keywords), sites_(spec.siteIds), domains_(spec.domainIds) {
    spec.validate();
    std::shuffle(keywords_.begin(), keywords_.end(), rng_);
    std::shuffle(sites_.begin(), sites_.end(), rng_);
    std::shuffle(domains_.begin(), domains_.end(), rng_);
  }

  std::vector<qlang::Query> take(std::uint32_t n) {
    std::vector<model::MixKey> slots;
    for (const auto& [key, count] : mix_counts(spec_.qmr, n)) slots.insert(slots.end(), count, key);
    std::shuffle(slots.begin(), slots.end(), rng_);
    std::vector<qlang::Query> out;
    out.reserve(slots.size());
    for (const auto& [type, k] : slots) out.push_back(make(type, k));
    return out;
  }

 private:
  qlang::Query make(ConditionType type, std::uint32_t k) {
    std::vector<std::string> kws;
    std::optional<ScopePredicate> scope;
    switch (type) {
      case ConditionType::single:
        kws.push_back(draw(keywords_, "keyword"));
        break;
      case ConditionType::multi:
        for (std::uint32_t i = 0; i < spec_.multiKeywords; ++i) kws.push_back(draw(keywords_, "keyword"));
        break;
      case ConditionType::limited: {
        kws.push_back(draw(keywords_, "keyword"));
        bool site = coin_(rng_);
        if (site && sites_.empty()) site = false;
        if (!site && domains_.empty()) site = true;
        scope = site ? ScopePredicate{ScopeAttr::siteId, draw(sites_, "siteId")}
                     : ScopePredicate{ScopeAttr::domainId, draw(domains_, "domainId")};
        break;
      }
    }
    return qlang::make_query(std::move(kws), scope, k);
  }

  const WorkloadSpec& spec_;
  std::mt19937_64 rng_;
  std::bernoulli_distribution coin_{0.5};
  std::vector<std::string> keywords_;
  std::vector<std::int64_t> sites_;
  std::vector<std::int64_t> domains_;
};

}  // namespace

std::vector<qlang::Query> generate_query_set(const WorkloadSpec& spec) { return Generator(spec).take(spec.queryCount); }

std::pair<std::vector<qlang::Query>, std::vector<qlang::Query>> generate_with_warmup(const WorkloadSpec& spec,
                                                                                   std::uint32_t warmupCount) {
  Generator g(spec);
  auto measured = g.take(spec.queryCount);
  auto warm = g.take(warmupCount);
  return {std::move(measured), std::move(warm)};
}

void check_disjoint(std::span<const qlang::Query> a, std::span<const qlang::Query> b) {
  std::set<std::string> kws;
  std::set<std::pair<ScopeAttr, std::int64_t>> scopes;
  for (const auto& q : a) {
    kws.insert(q.keywords.begin(), q.keywords.end());
    if (q.scope) scopes.insert({q.scope->attr, q.scope->value});
  }
  for (const auto& q : b) {
    for (const auto& kw : q.keywords) {
      if (kws.count(kw)) throw InvalidArgument("query sets overlap in keyword '" + kw + "'");
    }
    if (q.scope && scopes.count({q.scope->attr, q.scope->value})) {
      throw InvalidArgument("query sets overlap in " + std::string(attr_name(q.scope->attr)) + " " +
                            std::to_string(q.scope->value));
    }
  }
}

std::vector<double> poisson_schedule(std::size_t n, double lambdaQps, std::uint64_t seed) {
  if (!(lambdaQps > 0)) throw InvalidArgument("arrival rate must be > 0");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(lambdaQps / 1000.0);
  std::vector<double> out(n);
  double t = 0;
  for (auto& v : out) {
    t += gap(rng);
    v = t;
  }
  return out;
}

std::vector<qlang::Query> load_query_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<qlang::Query> out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(qlang::parse_query(t));
    } catch (const ParseError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

void save_query_file(const std::filesystem::path& path, std::span<const qlang::Query> queries) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot write");
  for (const auto& q : queries) out << qlang::format_query(q) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace shardex::bench
