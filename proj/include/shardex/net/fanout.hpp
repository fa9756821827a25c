#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shardex/net/protocol.hpp"
#include "shardex/net/socket.hpp"

namespace shardex::net {

using Clock = std::chrono::steady_clock;
using Micros = std::chrono::duration<double, std::micro>;

// A query could not be completed on every endpoint. No partial results.
class FanoutError : public Error {
 public:
  FanoutError(Endpoint endpoint, const std::string& what)
      : Error(endpoint.str() + ": " + what), endpoint_(std::move(endpoint)) {}
  const Endpoint& endpoint() const { return endpoint_; }

 private:
  Endpoint endpoint_;
};

struct FanoutOptions {
  std::chrono::milliseconds timeout{5000};
  std::chrono::milliseconds connectTimeout{2000};
};

struct SlaveReply {
  TopKMsg reply;
  Clock::time_point sent;     // just before encoding the request
  Clock::time_point arrived;  // after the reply was decoded
  Micros sendTime{};          // encode + write, on the caller
  Micros decodeTime{};        // read + decode, on the receiver thread

  Micros round_trip() const { return arrived - sent; }
  // Master-side handling attributable to this slave.
  Micros master_time() const { return sendTime + decodeTime; }
};

struct FanoutResult {
  std::vector<SlaveReply> replies;  // endpoint order
  Micros elapsed{};
};

struct PingResult {
  Micros roundTrip{};
  Micros masterTime{};
};

namespace detail {
class Connection;
}

// Persistent connections to every slave. A call writes the request to all
// slaves before waiting on any reply. Safe for concurrent callers; replies
// are matched to callers by query id.
class FanoutClient {
 public:
  explicit FanoutClient(std::vector<Endpoint> endpoints, FanoutOptions options = {});
  ~FanoutClient();
  FanoutClient(const FanoutClient&) = delete;
  FanoutClient& operator=(const FanoutClient&) = delete;

  // Overwrites query.queryId with a fresh id. Throws FanoutError naming the
  // first endpoint that failed, timed out or answered with ERROR.
  FanoutResult call(QueryMsg query);

  std::vector<PingResult> ping_all();
  std::vector<StatsReply> stats_all(StatsOp op);

  std::size_t size() const { return endpoints_.size(); }
  const std::vector<Endpoint>& endpoints() const { return endpoints_; }

 private:
  std::vector<Endpoint> endpoints_;
  FanoutOptions options_;
  std::vector<std::unique_ptr<detail::Connection>> connections_;
  std::atomic<std::uint64_t> nextId_{1};
};

}  // namespace shardex::net
