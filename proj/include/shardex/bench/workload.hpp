#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shardex/model/model.hpp"
#include "shardex/qlang/query.hpp"

namespace shardex::bench {

struct WorkloadSpec {
  std::uint32_t queryCount = 1000;
  std::map<model::MixKey, double> qmr{{{ConditionType::single, 10}, 1.0}};
  std::vector<std::string> keywords;
  std::vector<std::int64_t> siteIds;
  std::vector<std::int64_t> domainIds;
  double lambdaQps = 10;  // queries per second
  std::uint32_t repetitions = 1;
  std::uint64_t seed = 1;
  std::uint32_t multiKeywords = 2;  // keywords per multi query

  // Throws ConfigError.
  void validate() const;

  // key=value lines: queries, seed, lambda_qps, repetitions, multi_keywords,
  // qmr.<type>.k<N>, keywords (comma list), keyword_file (one per line,
  // relative to baseDir), site_ids and domain_ids (comma list of values or
  // lo-hi ranges).
  static WorkloadSpec parse(std::string_view text, const std::filesystem::path& baseDir = ".");
  // Same keys without the final validate(), for callers that fill pools later.
  static WorkloadSpec read(std::string_view text, const std::filesystem::path& baseDir = ".");
  static WorkloadSpec load(const std::filesystem::path& path);
};

// Exact per-(type, k) counts: largest-remainder rounding of qmr * n.
std::map<model::MixKey, std::uint32_t> mix_counts(const std::map<model::MixKey, double>& qmr, std::uint32_t n);

// Deterministic given spec.seed. Every keyword, siteId and domainId is used
// by at most one query. Throws ConfigError when a pool runs out.
std::vector<qlang::Query> generate_query_set(const WorkloadSpec& spec);

// The measured set (identical to generate_query_set) plus a warmup set of
// warmupCount queries drawn from what is left of the same pools, so the two
// share nothing.
std::pair<std::vector<qlang::Query>, std::vector<qlang::Query>> generate_with_warmup(const WorkloadSpec& spec,
                                                                                   std::uint32_t warmupCount);

// Throws InvalidArgument naming the first keyword or scope value used by
// both sets.
void check_disjoint(std::span<const qlang::Query> a, std::span<const qlang::Query> b);

// Arrival offsets in milliseconds from the start of a run.
std::vector<double> poisson_schedule(std::size_t n, double lambdaQps, std::uint64_t seed);

std::vector<qlang::Query> load_query_file(const std::filesystem::path& path);
void save_query_file(const std::filesystem::path& path, std::span<const qlang::Query> queries);

}  // namespace shardex::bench
