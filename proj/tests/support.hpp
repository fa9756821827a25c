#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shardex/bench/corpus.hpp"
#include "shardex/ir/index.hpp"
#include "shardex/node/master.hpp"
#include "shardex/node/slave.hpp"
#include "shardex/qlang/query.hpp"

namespace shardex::testing {

// Linear scan over raw documents: the reference every search path must match.
inline std::vector<RankedItem> brute_force(std::span<const ir::Document> docs, const qlang::Query& q) {
  std::vector<const ir::Document*> hits;
  for (const auto& d : docs) {
    if (q.scope) {
      auto v = q.scope->attr == ScopeAttr::siteId ? d.siteId : d.domainId;
      if (v != q.scope->value) continue;
    }
    auto toks = ir::tokenize(d.content);
    std::set<std::string> bag(toks.begin(), toks.end());
    bool all = std::all_of(q.keywords.begin(), q.keywords.end(), [&](const auto& k) { return bag.count(k) > 0; });
    if (all) hits.push_back(&d);
  }
  std::sort(hits.begin(), hits.end(), [](auto* a, auto* b) {
    if (a->rank != b->rank) return a->rank > b->rank;
    return a->docKey < b->docKey;
  });
  std::vector<RankedItem> out;
  for (std::size_t i = 0; i < hits.size() && i < q.k; ++i) out.push_back({hits[i]->docKey, hits[i]->rank});
  return out;
}

inline std::vector<RankedItem> as_ranked(const std::vector<node::MergedItem>& items) {
  std::vector<RankedItem> out;
  for (const auto& m : items) out.push_back({m.docKey, m.rank});
  return out;
}

inline std::vector<RankedItem> as_ranked(const std::vector<ir::TopKItem>& items) {
  std::vector<RankedItem> out;
  for (const auto& m : items) out.push_back({m.docKey, m.rank});
  return out;
}

inline std::shared_ptr<ir::IrIndex> make_index(std::vector<ir::Document> docs,
                                               std::vector<std::string> embed = {"siteId", "domainId"},
                                               std::uint32_t skip = ir::kDefaultSkipInterval) {
  auto ranked = ir::assign_doc_ids(std::move(docs));
  return std::make_shared<ir::IrIndex>(ir::build_index(ranked, std::move(embed), skip));
}

// Slaves over round-robin partitions, each behind a real TCP server on an
// ephemeral loopback port, plus a master connected to all of them.
struct Cluster {
  std::vector<std::shared_ptr<node::Slave>> slaves;
  std::vector<std::unique_ptr<node::SlaveServer>> servers;
  std::unique_ptr<node::Master> master;

  std::vector<net::Endpoint> endpoints() const {
    std::vector<net::Endpoint> eps;
    for (const auto& s : servers) eps.push_back(s->endpoint());
    return eps;
  }

  void start(unsigned concurrency) {
    for (auto& s : slaves) {
      servers.push_back(std::make_unique<node::SlaveServer>(s, node::SlaveServerOptions{{}, concurrency}));
      servers.back()->start();
    }
    master = std::make_unique<node::Master>(endpoints());
  }

  ~Cluster() {
    master.reset();
    for (auto& s : servers) s->stop();
  }
};

inline std::unique_ptr<Cluster> memory_cluster(const std::vector<ir::Document>& docs, std::size_t ns,
                                               node::SlaveOptions options = {}, unsigned concurrency = 2) {
  auto c = std::make_unique<Cluster>();
  for (auto& part : bench::partition_round_robin(docs, ns)) {
    c->slaves.push_back(std::make_shared<node::Slave>(std::shared_ptr<const ir::IndexReader>(make_index(part)), options));
  }
  c->start(concurrency);
  return c;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("shardex-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace shardex::testing
