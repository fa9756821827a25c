#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <set>

#include "shardex/bench/calibrate.hpp"
#include "shardex/bench/runner.hpp"
#include "shardex/bench/workload.hpp"
#include "shardex/error.hpp"
#include "support.hpp"

using namespace shardex;
using namespace shardex::bench;

namespace {

WorkloadSpec mixed_spec(std::uint32_t n) {
  WorkloadSpec s;
  s.queryCount = n;
  s.qmr = {{{ConditionType::single, 10}, 0.5}, {{ConditionType::multi, 50}, 0.3}, {{ConditionType::limited, 1000}, 0.2}};
  for (int i = 0; i < 2000; ++i) s.keywords.push_back("w" + std::to_string(i));
  for (int i = 0; i < 500; ++i) s.siteIds.push_back(i);
  for (int i = 0; i < 50; ++i) s.domainIds.push_back(i);
  return s;
}

std::set<std::string> used_values(std::span<const qlang::Query> qs) {
  std::set<std::string> out;
  for (const auto& q : qs) {
    for (const auto& k : q.keywords) out.insert(k);
    if (q.scope) out.insert(scope_term(q.scope->attr, q.scope->value));
  }
  return out;
}

}  // namespace

TEST(Mix, LargestRemainderCountsSumToN) {
  std::map<model::MixKey, double> qmr{{{ConditionType::single, 10}, 1.0 / 3},
                                      {{ConditionType::multi, 10}, 1.0 / 3},
                                      {{ConditionType::limited, 10}, 1.0 / 3}};
  auto c = mix_counts(qmr, 10);
  EXPECT_EQ(c.at({ConditionType::single, 10}), 4u);
  EXPECT_EQ(c.at({ConditionType::multi, 10}), 3u);
  EXPECT_EQ(c.at({ConditionType::limited, 10}), 3u);
  auto d = mix_counts({{{ConditionType::single, 10}, 0.55}, {{ConditionType::single, 50}, 0.45}}, 7);
  EXPECT_EQ(d.at({ConditionType::single, 10}), 4u);  // 3.85
  EXPECT_EQ(d.at({ConditionType::single, 50}), 3u);  // 3.15
}

TEST(Workload, DeterministicUniqueAndOnMix) {
  auto spec = mixed_spec(200);
  auto a = generate_query_set(spec);
  EXPECT_EQ(a, generate_query_set(spec));
  spec.seed = 2;
  EXPECT_NE(a, generate_query_set(spec));
  ASSERT_EQ(a.size(), 200u);
  std::map<model::MixKey, std::uint32_t> seen;
  std::set<std::string> values;
  std::size_t total = 0;
  for (const auto& q : a) {
    ++seen[{q.type, q.k}];
    qlang::validate(q);
    for (const auto& k : q.keywords) values.insert(k);
    if (q.scope) values.insert(scope_term(q.scope->attr, q.scope->value));
    total += q.keywords.size() + (q.scope ? 1 : 0);
  }
  EXPECT_EQ(values.size(), total);
  EXPECT_EQ(seen, mix_counts(spec.qmr, 200));
}

TEST(Workload, ExhaustedPoolIsConfigError) {
  auto spec = mixed_spec(10);
  spec.keywords.resize(5);
  EXPECT_THROW(generate_query_set(spec), ConfigError);
  auto bad = mixed_spec(10);
  bad.qmr.begin()->second = 0.9;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Workload, WarmupSetIsDisjoint) {
  auto spec = mixed_spec(100);
  auto [measured, warm] = generate_with_warmup(spec, 100);
  EXPECT_EQ(measured, generate_query_set(spec));
  EXPECT_EQ(warm.size(), 100u);
  EXPECT_NO_THROW(check_disjoint(measured, warm));
  auto a = used_values(measured), b = used_values(warm);
  for (const auto& v : a) EXPECT_FALSE(b.count(v)) << v;

  std::vector<qlang::Query> clash{qlang::make_query({measured[0].keywords[0]}, std::nullopt, 10)};
  try {
    check_disjoint(measured, clash);
    ADD_FAILURE();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find(measured[0].keywords[0]), std::string::npos);
  }
}

TEST(Workload, SpecTextAndQueryFiles) {
  shardex::testing::TempDir tmp;
  {
    std::ofstream kw(tmp.path / "kw.txt");
    kw << "alpha\nbeta\ngamma\n";
  }
  auto spec = WorkloadSpec::parse(
      "queries = 3\nseed = 9\nlambda_qps = 25\nkeyword_file = kw.txt\nsite_ids = 1-3, 10\n"
      "qmr.single.k10 = 0.5\nqmr.limited.k50 = 0.5\n",
      tmp.path);
  EXPECT_EQ(spec.keywords.size(), 3u);
  EXPECT_EQ(spec.siteIds, (std::vector<std::int64_t>{1, 2, 3, 10}));
  EXPECT_DOUBLE_EQ(spec.lambdaQps, 25);
  EXPECT_THROW(WorkloadSpec::parse("queries = 3\nwhat = 1\n"), ConfigError);
  auto qs = generate_query_set(spec);
  save_query_file(tmp.path / "q.txt", qs);
  EXPECT_EQ(load_query_file(tmp.path / "q.txt"), qs);
}

TEST(Workload, PoissonScheduleMean) {
  auto s = poisson_schedule(20000, 50, 3);
  ASSERT_EQ(s.size(), 20000u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  double meanGap = s.back() / s.size();
  EXPECT_NEAR(meanGap, 20.0, 0.5);
  EXPECT_EQ(s, poisson_schedule(20000, 50, 3));
}

TEST(Stats, PercentileAndMeans) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({5}, 99), 5);
  EXPECT_DOUBLE_EQ(percentile({}, 50), 0);
  std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(v), 5);
  EXPECT_NEAR(coefficient_of_variation(v), std::sqrt(32.0 / 7) / 5, 1e-12);
  std::vector<double> x{1, 2, 3}, y{3, 5, 7};
  auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2, 1e-12);
  EXPECT_NEAR(f.intercept, 1, 1e-12);
}

TEST(Stats, InstabilityNeedsThreeRisingWindows) {
  std::vector<QueryRecord> growing;
  for (int i = 0; i < 40; ++i) growing.push_back({static_cast<std::size_t>(i), ConditionType::single, 10, i * 10.0, 1000.0 - i, {}, 0});
  // In flight at 100, 200, 300, 400 ms: 10, 20, 30, 40.
  EXPECT_TRUE(detect_instability(growing, 100));
  std::vector<QueryRecord> steady;
  for (int i = 0; i < 40; ++i) steady.push_back({static_cast<std::size_t>(i), ConditionType::single, 10, i * 10.0, 5.0, {}, 0});
  EXPECT_FALSE(detect_instability(steady, 100));
}

TEST(Calibration, DecompositionArithmetic) {
  // (10 - 2 - 5) + 2 * (2 - 1.5)
  EXPECT_DOUBLE_EQ(network_service_from_decomposition(10, 2, 5, 1.5), 4.0);
  EXPECT_THROW(network_service_from_decomposition(6, 2, 5, 1.5), MeasurementError);
  EXPECT_THROW(network_service_from_decomposition(10, 1, 5, 1.5), MeasurementError);
}

TEST(Calibration, WeightsFromLatencies) {
  auto w = weights_from_latencies({{10, 25.01}, {50, 27.51}, {1000, 45.02}});
  EXPECT_DOUBLE_EQ(w.at(10), 1.0);
  EXPECT_NEAR(w.at(50), 1.09996, 1e-5);
  EXPECT_NEAR(w.at(1000), 1.80008, 1e-5);
  EXPECT_THROW(weights_from_latencies({{50, 1.0}}), MeasurementError);
  EXPECT_THROW(weights_from_latencies({{10, 0.0}}), MeasurementError);
}

TEST(Calibration, MergeCostFitIsPositive) {
  auto f = fit_merge_cost(5);
  EXPECT_GT(f.tBaseUs + f.tComparisonUs * 3, 0.0);
  EXPECT_GT(measure_context_switch_us(2000), 0.0);
}

TEST(Calibration, StubSlaveDelaysShowUpAsWeights) {
  bench::CorpusOptions o;
  o.documents = 300;
  o.vocabulary = 50;
  auto docs = bench::generate_corpus(o);
  node::SlaveOptions so;
  so.delayByK = {{10, std::chrono::milliseconds(4)}, {50, std::chrono::milliseconds(6)}, {1000, std::chrono::milliseconds(10)}};
  auto cluster = shardex::testing::memory_cluster(docs, 2, so);
  CalibrationOptions opts;
  opts.qmr = {{{ConditionType::single, 10}, 0.5}, {{ConditionType::single, 50}, 0.3}, {{ConditionType::single, 1000}, 0.2}};
  std::vector<qlang::Query> probes;
  for (int i = 0; i < 8; ++i) probes.push_back(qlang::make_query({bench::vocabulary_word(i)}, std::nullopt, 10));
  opts.probes = {{10, probes}, {50, probes}, {1000, probes}};
  opts.pingsPerSlave = 5;
  opts.mergeTrials = 3;
  opts.contextSwitchRounds = 500;
  opts.fitContextSwitchesOverSubsets = false;
  auto res = calibrate(*cluster->master, opts);
  EXPECT_NEAR(res.slaveWeights.at(50), 1.5, 0.075);
  EXPECT_NEAR(res.slaveWeights.at(1000), 2.5, 0.125);
  EXPECT_DOUBLE_EQ(res.params.wMaster.at(10), 1.0);
  EXPECT_NO_THROW(res.params.validate());
  EXPECT_NE(res.report().find("slave weight"), std::string::npos);
}

TEST(Runner, BenchmarkAndSampleExport) {
  bench::CorpusOptions o;
  o.documents = 500;
  o.vocabulary = 300;
  o.sites = 200;
  o.domains = 20;
  auto docs = bench::generate_corpus(o);
  auto cluster = shardex::testing::memory_cluster(docs, 3);
  auto spec = mixed_spec(30);
  spec.keywords.clear();
  for (int i = 0; i < 300; ++i) spec.keywords.push_back(bench::vocabulary_word(i));
  spec.siteIds.resize(200);
  spec.domainIds.resize(20);
  auto [measured, warm] = generate_with_warmup(spec, 20);
  EXPECT_THROW(warmup(*cluster->master, {}, measured), InvalidArgument);
  warmup(*cluster->master, warm, measured);
  for (const auto& s : cluster->master->client().stats_all(net::StatsOp::read)) EXPECT_EQ(s.queries, 0u);

  std::vector<RunMetrics> runs;
  for (std::uint64_t rep = 0; rep < 2; ++rep) {
    runs.push_back(run_benchmark(*cluster->master, measured, {200, 10 + rep, 10}));
    ASSERT_TRUE(runs.back().ok()) << runs.back().error.value_or("");
  }
  const auto& m = runs[0];
  EXPECT_EQ(m.records.size(), 30u);
  EXPECT_LE(m.p50Ms, m.p95Ms);
  EXPECT_LE(m.p95Ms, m.p99Ms);
  EXPECT_GT(m.throughputQps, 0);
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    EXPECT_EQ(m.records[i].index, i);
    EXPECT_EQ(m.records[i].resultCount, shardex::testing::brute_force(docs, measured[i]).size());
  }
  EXPECT_NE(m.to_text().find("# mean_ms"), std::string::npos);

  auto samples = export_samples(runs, 3);
  EXPECT_EQ(samples.np, 3u);
  EXPECT_EQ(samples.r, 2u);
  ASSERT_EQ(samples.perQuery.size(), 30u);
  EXPECT_EQ(samples.perQuery[4][4], std::max(runs[1].records[4].timing.slaves[1].slaveMs, 1e-3));
  auto back = model::SojournSampleSet::parse(samples.serialize());
  EXPECT_EQ(back.perQuery.size(), samples.perQuery.size());
  EXPECT_THROW(export_samples(runs, 4), MeasurementError);
  auto broken = runs;
  broken[1].records.pop_back();
  EXPECT_THROW(export_samples(broken, 3), MeasurementError);
}
