#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "shardex/bench/corpus.hpp"
#include "shardex/cli/cli.hpp"
#include "shardex/storage/index_file.hpp"
#include "support.hpp"

using namespace shardex;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "shardex");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(run({"estimate", "--nope"}).code, cli::kUsage);
}

TEST(Cli, BuildIndexPartitionsTheCorpus) {
  shardex::testing::TempDir tmp;
  auto corpus = tmp.path / "c.tsv";
  ASSERT_EQ(run({"gen-corpus", "--docs", "500", "--vocab", "100", "--out", corpus.string()}).code, cli::kOk);
  auto r = run({"build-index", "--corpus", corpus.string(), "--out-dir", (tmp.path / "idx").string(), "--partitions", "4"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::multiset<std::string> keys;
  for (int i = 0; i < 4; ++i) {
    auto idx = storage::load_index_full(tmp.path / "idx" / ("segment-" + std::to_string(i) + ".sdx"));
    EXPECT_EQ(idx.doc_count(), 125u);
    for (const auto& d : idx.docs()) keys.insert(d.docKey);
  }
  std::multiset<std::string> expect;
  for (const auto& d : bench::read_corpus_tsv(corpus)) expect.insert(d.docKey);
  EXPECT_EQ(keys, expect);
}

TEST(Cli, EstimateColumnsAndSaturation) {
  shardex::testing::TempDir tmp;
  auto params = tmp.path / "p.txt";
  write(params, model::reference_params().serialize());
  auto samples = tmp.path / "s.csv";
  write(samples, model::SojournSampleSet{5, 1, {0}, {{1, 2, 3, 4, 5}}}.serialize());
  auto r = run({"estimate", "--params", params.string(), "--samples", samples.string(), "--lambda-grid", "10,50"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  auto t = cli::Table::parse(r.out);
  EXPECT_EQ(t.header, (std::vector<std::string>{"lambda_qps", "MN-EST", "SLAVE-MAX-EST", "TOTAL-EST"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[0][2]), 5.0);
  EXPECT_LT(std::stod(t.rows[0][3]), std::stod(t.rows[1][3]));

  auto sat = run({"estimate", "--params", params.string(), "--samples", samples.string(), "--lambda-grid", "10,100000"});
  EXPECT_EQ(sat.code, cli::kSaturated);
  EXPECT_NE(sat.out.find("SATURATED(master-"), std::string::npos);
}

TEST(Cli, CompareIdenticalTablesGivesZeroError) {
  shardex::testing::TempDir tmp;
  auto est = tmp.path / "e.tsv";
  write(est, "lambda_qps\tMN-EST\tSLAVE-MAX-EST\tTOTAL-EST\n10\t1\t2\t3\n20\t1\t2\t4\n");
  auto r = run({"compare", "--estimated", est.string(), "--measured", est.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  auto out = cli::Table::parse(r.out);
  ASSERT_EQ(out.rows.size(), 2u);
  for (const auto& row : out.rows) EXPECT_DOUBLE_EQ(std::stod(row[out.column("error")]), 0.0);
  auto t = cli::Table::parse("lambda_qps\tTOTAL-EST\n10\t3\n20\t4\n");
  auto m = cli::Table::parse("lambda_qps\tMEASURED\n20\t5\n10\t3\n");
  auto c = cli::compare_tables(t, "TOTAL-EST", m, "MEASURED");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c[0].error, 0.0);
  EXPECT_DOUBLE_EQ(c[1].error, 0.2);
  EXPECT_THROW(cli::compare_tables(t, "TOTAL-EST", cli::Table::parse("lambda_qps\tMEASURED\n10\t3\n"), "MEASURED"),
               ConfigError);
  EXPECT_THROW(t.column("nope"), ConfigError);
}

TEST(Cli, GenQueriesWritesDisjointSets) {
  shardex::testing::TempDir tmp;
  auto corpus = tmp.path / "c.tsv";
  ASSERT_EQ(run({"gen-corpus", "--docs", "300", "--vocab", "400", "--out", corpus.string()}).code, cli::kOk);
  auto q = tmp.path / "q.txt", w = tmp.path / "w.txt";
  auto r = run({"gen-queries", "--corpus", corpus.string(), "--count", "40", "--qmr", "single.k10=0.5,limited.k50=0.5",
                "--out", q.string(), "--warmup-out", w.string(), "--warmup-count", "40"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::ifstream in(q);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 40);
}
