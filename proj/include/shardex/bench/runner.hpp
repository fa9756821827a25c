#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shardex/model/model.hpp"
#include "shardex/node/master.hpp"

namespace shardex::bench {

// Runs the warmup set through the master, then resets slave counters. An
// empty warmup set needs allowEmpty (cold run). Throws InvalidArgument when
// the two sets share a keyword or scope value.
void warmup(node::Master& master, std::span<const qlang::Query> warmupSet, std::span<const qlang::Query> measuredSet,
            bool allowEmpty = false);

struct QueryRecord {
  std::size_t index = 0;  // position in the query set
  ConditionType type = ConditionType::single;
  std::uint32_t k = 10;
  double scheduledMs = 0;  // offset of the planned arrival
  double totalMs = 0;      // planned arrival to merged result
  node::TimingBreakdown timing;
  std::size_t resultCount = 0;
};

struct RunOptions {
  double lambdaQps = 10;
  std::uint64_t seed = 1;
  double windowSeconds = 10;  // instability detection window
};

struct RunMetrics {
  std::vector<QueryRecord> records;  // in query-set order
  std::size_t issued = 0;
  double makespanMs = 0;
  double meanMs = 0;
  double p50Ms = 0;
  double p95Ms = 0;
  double p99Ms = 0;
  double throughputQps = 0;
  bool unstable = false;  // in-flight count grew over 3 consecutive windows
  std::optional<std::string> error;

  bool ok() const { return !error && records.size() == issued; }
  // Delimited per-query lines plus a '#' summary block.
  std::string to_text() const;
};

// Issues every query at its Poisson arrival time without waiting for
// earlier ones. A failure stops dispatching; completed records are kept
// and error is set.
RunMetrics run_benchmark(node::Master& master, std::span<const qlang::Query> queries, const RunOptions& options);

// Percentile by linear interpolation between closest ranks; p in [0, 100].
double percentile(std::vector<double> values, double p);

// True when the in-flight count sampled at window ends rises in 3
// consecutive windows.
bool detect_instability(std::span<const QueryRecord> records, double windowMs);

// Builds the slave sojourn sample set from r runs of the same query set on
// np slaves. Throws MeasurementError when a run is incomplete.
model::SojournSampleSet export_samples(std::span<const RunMetrics> runs, std::uint32_t np);

}  // namespace shardex::bench
