#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "shardex/ir/search.hpp"
#include "shardex/net/protocol.hpp"
#include "shardex/net/socket.hpp"
#include "shardex/storage/disk_index.hpp"

namespace shardex::node {

using Clock = std::chrono::steady_clock;

struct SlaveOptions {
  ir::LimitedStrategy strategy = ir::LimitedStrategy::automatic;
  // Test hooks. processingDelay is added inside the reported processing
  // time, transferDelay after it has been taken.
  std::chrono::microseconds processingDelay{0};
  std::chrono::microseconds transferDelay{0};
  // Extra processing delay by top-k value, on top of processingDelay.
  std::map<std::uint32_t, std::chrono::microseconds> delayByK;
};

// Query handler over one immutable index segment.
class Slave {
 public:
  explicit Slave(std::shared_ptr<const ir::IndexReader> index, SlaveOptions options = {});
  // Same, with buffer statistics and cache control from the on-disk index.
  explicit Slave(std::shared_ptr<storage::DiskIndex> index, SlaveOptions options = {});

  // TopKMsg on success, ErrorMsg for a malformed or unsupported query.
  // processingMicros covers receivedAt to completion.
  net::Message handle_query(const net::QueryMsg& query, Clock::time_point receivedAt = Clock::now());

  // Applies op, then reports counters.
  net::StatsReply stats(net::StatsOp op = net::StatsOp::read);

  const ir::IndexReader& index() const { return *index_; }
  const SlaveOptions& options() const { return options_; }
  void count_error() { errors_.fetch_add(1); }

 private:
  std::shared_ptr<const ir::IndexReader> index_;
  std::shared_ptr<storage::DiskIndex> disk_;
  SlaveOptions options_;
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::uint64_t> errors_{0};
};

struct SlaveServerOptions {
  net::Endpoint listen;
  unsigned concurrency = 4;  // worker threads executing queries
};

// Serves QUERY, PING and STATS frames. Each connection has a reader thread;
// queries run on a shared worker pool, so replies on one connection may be
// returned out of order and are matched by query id.
class SlaveServer {
 public:
  SlaveServer(std::shared_ptr<Slave> slave, SlaveServerOptions options);
  ~SlaveServer();
  SlaveServer(const SlaveServer&) = delete;
  SlaveServer& operator=(const SlaveServer&) = delete;

  // Binds and starts serving. Throws NetError when the port is not bindable.
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  net::Endpoint endpoint() const { return {options_.listen.host, port_}; }
  Slave& slave() { return *slave_; }

 private:
  struct Conn {
    net::Socket sock;
    std::mutex writeMu;
    void send(const net::Message& m);
  };
  struct Job {
    std::shared_ptr<Conn> conn;
    net::QueryMsg query;
    Clock::time_point receivedAt;
  };

  void accept_loop();
  void read_loop(std::shared_ptr<Conn> conn);
  void worker_loop();

  std::shared_ptr<Slave> slave_;
  SlaveServerOptions options_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  bool started_ = false;

  std::thread acceptor_;
  std::vector<std::thread> workers_;

  std::mutex connMu_;
  std::list<std::shared_ptr<Conn>> conns_;
  std::list<std::thread> readers_;

  std::mutex jobMu_;
  std::condition_variable jobCv_;
  std::deque<Job> jobs_;
  bool stopping_ = false;
};

}  // namespace shardex::node
