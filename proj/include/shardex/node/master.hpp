#pragma once

#include <memory>
#include <string_view>
#include <thread>
#include <vector>

#include "shardex/net/fanout.hpp"
#include "shardex/node/loser_tree.hpp"
#include "shardex/qlang/query.hpp"

namespace shardex::node {

struct SlaveTiming {
  double masterMs = 0;     // m_i: encode/send plus receive/decode on the master
  double slaveMs = 0;      // s_i: reported by the slave
  double networkMs = 0;    // nt_i = roundTrip - m_i - s_i
  double roundTripMs = 0;  // request written to reply decoded
};

struct TimingBreakdown {
  double parseMs = 0;  // query text to Query; 0 for pre-parsed queries
  std::vector<SlaveTiming> slaves;
  double fanoutMs = 0;  // first send to last reply
  double mergeMs = 0;
  double totalMs = 0;

  double slave_max_ms() const;
  double round_trip_max_ms() const;
};

struct QueryResult {
  std::vector<MergedItem> items;
  TimingBreakdown timing;
  MergeCounters merge;
};

// Scatter-gather coordinator. Safe for concurrent execute() calls.
class Master {
 public:
  explicit Master(std::vector<net::Endpoint> slaves, net::FanoutOptions options = {});

  // Throws FanoutError when any slave fails.
  QueryResult execute(const qlang::Query& query);
  // Throws ParseError, then as execute().
  QueryResult execute_text(std::string_view text);

  net::FanoutClient& client() { return client_; }
  std::size_t slave_count() const { return client_.size(); }

 private:
  net::FanoutClient client_;
};

net::QueryMsg to_message(const qlang::Query& q);

// Answers user QUERY frames with the merged TOPK (or ERROR). Requests on one
// connection are answered in order.
class MasterServer {
 public:
  MasterServer(std::shared_ptr<Master> master, net::Endpoint listen);
  ~MasterServer();
  MasterServer(const MasterServer&) = delete;
  MasterServer& operator=(const MasterServer&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();
  void serve(std::shared_ptr<net::Socket> sock);

  std::shared_ptr<Master> master_;
  net::Endpoint listen_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  bool started_ = false;
  std::thread acceptor_;
  std::mutex connMu_;
  std::vector<std::shared_ptr<net::Socket>> conns_;
  std::vector<std::thread> handlers_;
};

}  // namespace shardex::node
