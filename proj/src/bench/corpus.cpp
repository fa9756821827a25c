#include "shardex/bench/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "shardex/error.hpp"

namespace shardex::bench {

std::string vocabulary_word(std::size_t i) { return "w" + std::to_string(i); }

std::vector<ir::Document> generate_corpus(const CorpusOptions& o) {
  if (o.vocabulary == 0 || o.minTokens == 0 || o.maxTokens < o.minTokens || o.sites < 1 || o.domains < 1) {
    throw InvalidArgument("bad corpus options");
  }
  std::mt19937_64 rng(o.seed);
  std::vector<double> weights(o.vocabulary);
  for (std::size_t i = 0; i < o.vocabulary; ++i) weights[i] = 1.0 / std::pow(static_cast<double>(i + 1), o.zipfExponent);
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(o.minTokens, o.maxTokens);
  std::uniform_int_distribution<std::int64_t> site(0, o.sites - 1);
  std::uniform_int_distribution<std::int64_t> domain(0, o.domains - 1);
  std::uniform_real_distribution<double> rank(0.0, 1.0);

  std::set<double> usedRanks;
  std::vector<ir::Document> docs;
  docs.reserve(o.documents);
  for (std::size_t d = 0; d < o.documents; ++d) {
    ir::Document doc;
    doc.docKey = "d" + std::to_string(d);
    doc.url = "http://example.org/" + std::to_string(d);
    doc.siteId = site(rng);
    doc.domainId = domain(rng);
    do {
      doc.rank = rank(rng);
    } while (!usedRanks.insert(doc.rank).second);
    const auto n = length(rng);
    for (std::size_t t = 0; t < n; ++t) {
      if (t) doc.content += ' ';
      doc.content += vocabulary_word(word(rng));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

namespace {

template <class T>
T field_number(std::string_view s, std::size_t lineNo, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("corpus line " + std::to_string(lineNo) + ": bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<ir::Document> read_corpus_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open corpus");
  std::vector<ir::Document> docs;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (int i = 0; i < 5; ++i) {
      auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        throw ConfigError("corpus line " + std::to_string(lineNo) + ": expected 6 tab-separated fields");
      }
      f.push_back(rest.substr(0, tab));
      rest = rest.substr(tab + 1);
    }
    f.push_back(rest);
    ir::Document d;
    d.docKey = std::string(f[0]);
    d.url = std::string(f[1]);
    d.siteId = field_number<std::int64_t>(f[2], lineNo, "siteId");
    d.domainId = field_number<std::int64_t>(f[3], lineNo, "domainId");
    d.rank = field_number<double>(f[4], lineNo, "rank");
    d.content = std::string(f[5]);
    if (d.docKey.empty()) throw ConfigError("corpus line " + std::to_string(lineNo) + ": empty docKey");
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_corpus_tsv(const std::filesystem::path& path, std::span<const ir::Document> docs) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot write corpus");
  char buf[64];
  for (const auto& d : docs) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d.rank);
    out << d.docKey << '\t' << d.url << '\t' << d.siteId << '\t' << d.domainId << '\t' << std::string_view(buf, ptr - buf)
        << '\t' << d.content << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<std::vector<ir::Document>> partition_round_robin(std::vector<ir::Document> docs, std::size_t parts) {
  if (parts == 0) throw InvalidArgument("partitions must be >= 1");
  std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.docKey < b.docKey;
  });
  std::vector<std::vector<ir::Document>> out(parts);
  for (std::size_t i = 0; i < docs.size(); ++i) out[i % parts].push_back(std::move(docs[i]));
  return out;
}

}  // namespace shardex::bench
