#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shardex/model/model.hpp"

namespace shardex::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kSaturated = 3;

// Dispatches a full argument vector (argv[0] is the program name).
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

struct EstimateRow {
  double lambdaQps = 0;
  std::optional<model::ResponseEstimate> estimate;
  std::string saturatedComponent;  // set when estimate is empty
};

// One row per load point. samples has either one entry (used for every
// point) or one per point.
std::vector<EstimateRow> estimate_rows(const model::ModelParams& params, std::span<const model::SojournSampleSet> samples,
                                       std::span<const double> lambdaQps, std::uint32_t k);

// Tab-separated with header "lambda_qps MN-EST SLAVE-MAX-EST TOTAL-EST".
std::string format_estimate(std::span<const EstimateRow> rows);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static Table parse(std::string_view text);
  // Column index; throws ConfigError when absent.
  std::size_t column(std::string_view name) const;
};

struct CompareRow {
  double lambdaQps = 0;
  double estimated = 0;
  double measured = 0;
  double error = 0;
};

// Rows are matched on the first column (lambda). Throws ConfigError when a
// lambda has no partner or a cell is not numeric.
std::vector<CompareRow> compare_tables(const Table& estimated, std::string_view estColumn, const Table& measured,
                                       std::string_view measuredColumn);

}  // namespace shardex::cli
