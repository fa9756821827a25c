#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shardex/ir/index.hpp"

namespace shardex::bench {

struct CorpusOptions {
  std::size_t documents = 10000;
  std::size_t vocabulary = 5000;  // words "w0".."w<n-1>", Zipf distributed
  double zipfExponent = 1.0;
  std::size_t minTokens = 20;
  std::size_t maxTokens = 60;
  std::int64_t sites = 2000;
  std::int64_t domains = 200;
  std::uint64_t seed = 42;
};

// Deterministic given the seed. Ranks are distinct.
std::vector<ir::Document> generate_corpus(const CorpusOptions& options);

std::string vocabulary_word(std::size_t i);

// One document per line: docKey, url, siteId, domainId, rank, content,
// tab-separated. Throws ConfigError with the line number on bad input.
std::vector<ir::Document> read_corpus_tsv(const std::filesystem::path& path);
void write_corpus_tsv(const std::filesystem::path& path, std::span<const ir::Document> docs);

// Round-robin over documents sorted by rank (descending, docKey ascending).
std::vector<std::vector<ir::Document>> partition_round_robin(std::vector<ir::Document> docs, std::size_t parts);

}  // namespace shardex::bench
