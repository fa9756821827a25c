#include <gtest/gtest.h>

#include <future>
#include <random>

#include "shardex/error.hpp"
#include "shardex/net/socket.hpp"
#include "shardex/node/loser_tree.hpp"
#include "support.hpp"

using namespace shardex;
using namespace shardex::node;

namespace {

std::vector<std::vector<RankedItem>> random_streams(std::mt19937_64& rng, std::size_t ns, std::size_t maxLen) {
  std::uniform_int_distribution<std::size_t> len(0, maxLen);
  // Coarse ranks so ties across and within streams are common.
  std::uniform_int_distribution<int> rank(0, 20);
  std::vector<std::vector<RankedItem>> out(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t i = len(rng); i > 0; --i) out[s].push_back({"k" + std::to_string(rng() % 1000), rank(rng) / 4.0});
    std::sort(out[s].begin(), out[s].end(), [](const auto& a, const auto& b) {
      if (a.rank != b.rank) return a.rank > b.rank;
      return a.docKey < b.docKey;
    });
  }
  return out;
}

std::vector<MergedItem> flatten_sort(const std::vector<std::vector<RankedItem>>& streams, std::size_t k) {
  std::vector<MergedItem> all;
  for (std::uint32_t s = 0; s < streams.size(); ++s)
    for (const auto& it : streams[s]) all.push_back({it.docKey, it.rank, s});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    if (a.source != b.source) return a.source < b.source;
    return a.docKey < b.docKey;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace

TEST(LoserTree, TreeHeight) {
  EXPECT_EQ(tree_height(0), 0u);
  EXPECT_EQ(tree_height(1), 0u);
  EXPECT_EQ(tree_height(2), 1u);
  EXPECT_EQ(tree_height(5), 3u);
  EXPECT_EQ(tree_height(8), 3u);
  EXPECT_EQ(tree_height(300), 9u);
}

TEST(LoserTree, MatchesFlattenSortOracle) {
  std::mt19937_64 rng(12);
  for (std::size_t ns : {1u, 2u, 3u, 5u, 17u, 64u, 300u}) {
    for (int trial = 0; trial < 30; ++trial) {
      auto streams = random_streams(rng, ns, 40);
      std::vector<MergeStream> in;
      for (std::uint32_t s = 0; s < ns; ++s) in.push_back({s, streams[s]});
      for (std::size_t k : {1u, 10u, 50u, 1000u}) {
        MergeCounters c;
        auto got = loser_tree_merge(in, k, &c);
        ASSERT_EQ(got, flatten_sort(streams, k)) << "ns=" << ns << " k=" << k;
        EXPECT_EQ(c.emitted, got.size());
        EXPECT_LE(c.maxReplayPerItem, tree_height(ns));
        EXPECT_LE(c.replayComparisons, c.emitted * tree_height(ns));
      }
    }
  }
}

TEST(LoserTree, EdgeCases) {
  EXPECT_TRUE(loser_tree_merge({}, 10).empty());
  std::vector<RankedItem> a{{"x", 1}};
  MergeStream one[] = {{0, a}};
  EXPECT_TRUE(loser_tree_merge(one, 0).empty());
  std::vector<RankedItem> empty;
  MergeStream two[] = {{0, empty}, {1, a}};
  auto r = loser_tree_merge(two, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].source, 1u);
}

TEST(LoserTree, RisingStreamIsContractViolation) {
  std::vector<RankedItem> bad{{"a", 0.1}, {"b", 0.2}};
  std::vector<RankedItem> ok{{"c", 0.5}};
  MergeStream in[] = {{0, ok}, {1, bad}};
  EXPECT_THROW(loser_tree_merge(in, 1), ContractViolation);
}

class NodeTest : public ::testing::Test {
 protected:
  static std::vector<ir::Document> corpus() {
    bench::CorpusOptions o;
    o.documents = 1200;
    o.vocabulary = 150;
    o.sites = 25;
    o.domains = 5;
    o.seed = 77;
    return bench::generate_corpus(o);
  }
};

TEST_F(NodeTest, SlaveRejectsBadQueries) {
  Slave slave(std::shared_ptr<const ir::IndexReader>(shardex::testing::make_index(corpus(), {})));
  net::QueryMsg q{5, static_cast<ConditionType>(9), {"w1"}, std::nullopt, 10};
  auto r = slave.handle_query(q);
  ASSERT_TRUE(std::holds_alternative<net::ErrorMsg>(r));
  EXPECT_EQ(std::get<net::ErrorMsg>(r).queryId, 5u);
  q.type = ConditionType::single;
  q.k = 0;
  EXPECT_TRUE(std::holds_alternative<net::ErrorMsg>(slave.handle_query(q)));

  // Embedded strategy forced on an index without embedded attributes.
  Slave forced(std::shared_ptr<const ir::IndexReader>(shardex::testing::make_index(corpus(), {})),
               SlaveOptions{ir::LimitedStrategy::embedded});
  net::QueryMsg lim{6, ConditionType::limited, {"w1"}, ScopePredicate{ScopeAttr::siteId, 1}, 10};
  auto e = forced.handle_query(lim);
  ASSERT_TRUE(std::holds_alternative<net::ErrorMsg>(e));
  EXPECT_NE(std::get<net::ErrorMsg>(e).message.find("siteId"), std::string::npos);
  EXPECT_EQ(forced.stats().errors, 1u);
}

TEST_F(NodeTest, ProcessingTimeCoversTheDelayButNotTransfer) {
  SlaveOptions o;
  o.processingDelay = std::chrono::milliseconds(20);
  o.transferDelay = std::chrono::milliseconds(30);
  Slave slave(std::shared_ptr<const ir::IndexReader>(shardex::testing::make_index(corpus())), o);
  auto t0 = Clock::now();
  auto r = slave.handle_query({1, ConditionType::single, {"w2"}, std::nullopt, 10}, t0);
  auto wall = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  auto& topk = std::get<net::TopKMsg>(r);
  EXPECT_GE(topk.processingMicros, 20000u);
  EXPECT_LT(static_cast<double>(topk.processingMicros), wall - 25000);
}

TEST_F(NodeTest, DistributedEqualsBruteForce) {
  auto docs = corpus();
  auto cluster = shardex::testing::memory_cluster(docs, 4);
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> word(0, 60);
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> kws{bench::vocabulary_word(word(rng))};
    std::optional<ScopePredicate> scope;
    if (i % 3 == 1) kws.push_back(bench::vocabulary_word(word(rng) + 61));
    if (i % 3 == 2) scope = ScopePredicate{ScopeAttr::domainId, static_cast<std::int64_t>(i % 5)};
    auto q = qlang::make_query(kws, scope, i % 2 ? 10 : 1000);
    auto r = cluster->master->execute(q);
    EXPECT_EQ(shardex::testing::as_ranked(r.items), shardex::testing::brute_force(docs, q));
    ASSERT_EQ(r.timing.slaves.size(), 4u);
    for (const auto& s : r.timing.slaves) {
      EXPECT_LE(s.slaveMs, s.roundTripMs);
      EXPECT_GE(s.networkMs, 0.0);
    }
    EXPECT_GE(r.timing.totalMs, r.timing.fanoutMs);
  }
}

TEST_F(NodeTest, ConcurrentIdenticalQueriesAgree) {
  auto docs = corpus();
  auto cluster = shardex::testing::memory_cluster(docs, 3, {}, 3);
  auto q = qlang::make_query({"w3"}, std::nullopt, 50);
  auto expect = shardex::testing::brute_force(docs, q);
  std::vector<std::future<QueryResult>> futures;
  for (int i = 0; i < 100; ++i)
    futures.push_back(std::async(std::launch::async, [&] { return cluster->master->execute(q); }));
  for (auto& f : futures) EXPECT_EQ(shardex::testing::as_ranked(f.get().items), expect);
  auto stats = cluster->master->client().stats_all(net::StatsOp::read);
  for (const auto& s : stats) EXPECT_EQ(s.queries, 100u);
  auto reset = cluster->master->client().stats_all(net::StatsOp::resetCounters);
  for (const auto& s : reset) EXPECT_EQ(s.queries, 0u);
}

TEST_F(NodeTest, PingAndSlaveErrorsSurfaceThroughMaster) {
  auto cluster = shardex::testing::memory_cluster(corpus(), 2);
  auto pings = cluster->master->client().ping_all();
  ASSERT_EQ(pings.size(), 2u);
  for (const auto& p : pings) EXPECT_GT(p.roundTrip.count(), 0.0);

  net::QueryMsg bad{0, static_cast<ConditionType>(7), {"w1"}, std::nullopt, 10};
  EXPECT_THROW(cluster->master->client().call(bad), net::FanoutError);
  // The connection survives an ERROR reply.
  EXPECT_NO_THROW(cluster->master->execute_text(R"(SELECT TOP 10 WHERE MATCH(content, "w1"))"));
  EXPECT_THROW(cluster->master->execute_text("SELECT nonsense"), ParseError);
}

TEST_F(NodeTest, SlaveServerSurvivesGarbageFrames) {
  auto cluster = shardex::testing::memory_cluster(corpus(), 1);
  auto s = net::Socket::connect(cluster->servers[0]->endpoint(), std::chrono::milliseconds(1000));
  std::vector<std::uint8_t> unknownType{0, 0, 0, 1, 77};
  s.write_all(unknownType);
  auto reply = net::read_message(s);
  ASSERT_TRUE(reply);
  EXPECT_TRUE(std::holds_alternative<net::ErrorMsg>(*reply));
  net::write_message(s, net::PingMsg{});
  auto pong = net::read_message(s);
  ASSERT_TRUE(pong);
  EXPECT_TRUE(std::holds_alternative<net::PingMsg>(*pong));
  net::write_message(s, net::QueryMsg{9, ConditionType::single, {"w0"}, std::nullopt, 5});
  auto topk = net::read_message(s);
  ASSERT_TRUE(topk);
  EXPECT_EQ(std::get<net::TopKMsg>(*topk).queryId, 9u);
}

TEST_F(NodeTest, MasterServerAnswersUserQueries) {
  auto docs = corpus();
  auto cluster = shardex::testing::memory_cluster(docs, 2);
  auto master = std::make_shared<Master>(cluster->endpoints());
  MasterServer server(master, {"127.0.0.1", 0});
  server.start();
  auto s = net::Socket::connect({"127.0.0.1", server.port()}, std::chrono::milliseconds(1000));
  auto q = qlang::make_query({"w4"}, std::nullopt, 10);
  auto msg = to_message(q);
  msg.queryId = 77;
  net::write_message(s, msg);
  auto reply = net::read_message(s);
  ASSERT_TRUE(reply);
  auto& topk = std::get<net::TopKMsg>(*reply);
  EXPECT_EQ(topk.queryId, 77u);
  EXPECT_EQ(topk.items, shardex::testing::brute_force(docs, q));
  s.shutdown();
  server.stop();
}
