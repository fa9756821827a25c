#include "shardex/net/fanout.hpp"

#include <future>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

namespace shardex::net {

namespace detail {

struct Incoming {
  Message msg;
  Clock::time_point arrived;
  Micros decodeTime{};
};

class Connection {
 public:
  Connection(Endpoint endpoint, FanoutOptions options) : endpoint_(std::move(endpoint)), options_(options) {}

  ~Connection() {
    std::lock_guard lock(stateMu_);
    sock_.shutdown();
    if (reader_.joinable()) reader_.join();
  }

  const Endpoint& endpoint() const { return endpoint_; }

  std::future<Incoming> send_query(const QueryMsg& q, SlaveReply& timing) {
    std::future<Incoming> fut;
    {
      std::lock_guard lock(pendingMu_);
      fut = pending_[q.queryId].get_future();
    }
    try {
      std::lock_guard lock(stateMu_);
      ensure_connected_locked();
      timing.sent = Clock::now();
      sock_.write_all(encode_frame(q));
      timing.sendTime = Clock::now() - timing.sent;
    } catch (const FanoutError&) {
      cancel(q.queryId);
      throw;
    } catch (const std::exception& e) {
      cancel(q.queryId);
      throw FanoutError(endpoint_, e.what());
    }
    return fut;
  }

  void cancel(std::uint64_t id) {
    std::lock_guard lock(pendingMu_);
    pending_.erase(id);
  }

  // Request/response exchange for messages without a query id.
  Incoming control(const Message& request, Clock::time_point deadline, Micros* sendTime = nullptr) {
    std::lock_guard serial(controlMu_);
    std::future<Incoming> fut;
    {
      std::lock_guard lock(pendingMu_);
      control_.emplace();
      fut = control_->get_future();
    }
    try {
      std::lock_guard lock(stateMu_);
      ensure_connected_locked();
      auto t0 = Clock::now();
      sock_.write_all(encode_frame(request));
      if (sendTime) *sendTime = Clock::now() - t0;
    } catch (const FanoutError&) {
      clear_control();
      throw;
    } catch (const std::exception& e) {
      clear_control();
      throw FanoutError(endpoint_, e.what());
    }
    if (fut.wait_until(deadline) == std::future_status::timeout) {
      clear_control();
      throw FanoutError(endpoint_, "timed out");
    }
    return fut.get();
  }

 private:
  void clear_control() {
    std::lock_guard lock(pendingMu_);
    control_.reset();
  }

  void ensure_connected_locked() {
    if (sock_.valid() && !dead_.load()) return;
    sock_.shutdown();
    if (reader_.joinable()) reader_.join();
    try {
      sock_ = Socket::connect(endpoint_, options_.connectTimeout);
    } catch (const std::exception& e) {
      sock_ = Socket();
      throw FanoutError(endpoint_, e.what());
    }
    dead_.store(false);
    reader_ = std::thread([this] { reader_loop(); });
  }

  void reader_loop() {
    while (true) {
      std::optional<std::vector<std::uint8_t>> body;
      try {
        body = read_frame_body(sock_);
      } catch (const std::exception& e) {
        fail_all(e.what());
        return;
      }
      if (!body) {
        fail_all("connection closed by peer");
        return;
      }
      Incoming in;
      auto t0 = Clock::now();
      try {
        in.msg = decode_body(*body);
      } catch (const std::exception& e) {
        fail_all(std::string("protocol error: ") + e.what());
        return;
      }
      in.arrived = Clock::now();
      in.decodeTime = in.arrived - t0;
      route(std::move(in));
    }
  }

  void route(Incoming in) {
    std::optional<std::uint64_t> id;
    if (auto* t = std::get_if<TopKMsg>(&in.msg)) id = t->queryId;
    if (auto* e = std::get_if<ErrorMsg>(&in.msg); e && e->queryId != 0) id = e->queryId;

    std::lock_guard lock(pendingMu_);
    if (id) {
      auto it = pending_.find(*id);
      if (it == pending_.end()) return;  // cancelled or timed out
      it->second.set_value(std::move(in));
      pending_.erase(it);
      return;
    }
    if (control_) {
      control_->set_value(std::move(in));
      control_.reset();
    }
  }

  void fail_all(const std::string& why) {
    dead_.store(true);
    std::lock_guard lock(pendingMu_);
    for (auto& [_, p] : pending_) p.set_exception(std::make_exception_ptr(FanoutError(endpoint_, why)));
    pending_.clear();
    if (control_) {
      control_->set_exception(std::make_exception_ptr(FanoutError(endpoint_, why)));
      control_.reset();
    }
  }

  Endpoint endpoint_;
  FanoutOptions options_;

  std::mutex stateMu_;  // socket lifecycle and writes
  Socket sock_;
  std::thread reader_;
  std::atomic<bool> dead_{false};

  std::mutex controlMu_;
  std::mutex pendingMu_;
  std::unordered_map<std::uint64_t, std::promise<Incoming>> pending_;
  std::optional<std::promise<Incoming>> control_;
};

}  // namespace detail

FanoutClient::FanoutClient(std::vector<Endpoint> endpoints, FanoutOptions options)
    : endpoints_(std::move(endpoints)), options_(options) {
  if (endpoints_.empty()) throw InvalidArgument("fan-out needs at least one endpoint");
  for (const auto& ep : endpoints_) connections_.push_back(std::make_unique<detail::Connection>(ep, options_));
}

FanoutClient::~FanoutClient() = default;

FanoutResult FanoutClient::call(QueryMsg query) {
  const auto start = Clock::now();
  query.queryId = nextId_.fetch_add(1);
  const std::size_t n = connections_.size();

  FanoutResult result;
  result.replies.resize(n);
  std::vector<std::future<detail::Incoming>> futures;
  futures.reserve(n);
  auto cancel_all = [&] {
    for (auto& c : connections_) c->cancel(query.queryId);
  };

  for (std::size_t i = 0; i < n; ++i) {
    try {
      futures.push_back(connections_[i]->send_query(query, result.replies[i]));
    } catch (...) {
      cancel_all();
      throw;
    }
  }

  const auto deadline = start + options_.timeout;
  for (std::size_t i = 0; i < n; ++i) {
    if (futures[i].wait_until(deadline) == std::future_status::timeout) {
      cancel_all();
      throw FanoutError(endpoints_[i], "timed out after " + std::to_string(options_.timeout.count()) + " ms");
    }
    detail::Incoming in;
    try {
      in = futures[i].get();
    } catch (...) {
      cancel_all();
      throw;
    }
    if (auto* err = std::get_if<ErrorMsg>(&in.msg)) {
      cancel_all();
      throw FanoutError(endpoints_[i], "slave error: " + err->message);
    }
    auto& r = result.replies[i];
    r.reply = std::move(std::get<TopKMsg>(in.msg));
    r.arrived = in.arrived;
    r.decodeTime = in.decodeTime;
  }
  result.elapsed = Clock::now() - start;
  return result;
}

std::vector<PingResult> FanoutClient::ping_all() {
  std::vector<PingResult> out;
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    const auto start = Clock::now();
    Micros sendTime{};
    auto in = connections_[i]->control(PingMsg{}, start + options_.timeout, &sendTime);
    if (!std::holds_alternative<PingMsg>(in.msg)) throw FanoutError(endpoints_[i], "unexpected reply to PING");
    out.push_back({in.arrived - start, sendTime + in.decodeTime});
  }
  return out;
}

std::vector<StatsReply> FanoutClient::stats_all(StatsOp op) {
  std::vector<StatsReply> out;
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    auto in = connections_[i]->control(StatsRequest{op}, Clock::now() + options_.timeout);
    if (auto* err = std::get_if<ErrorMsg>(&in.msg)) throw FanoutError(endpoints_[i], "slave error: " + err->message);
    auto* reply = std::get_if<StatsReply>(&in.msg);
    if (!reply) throw FanoutError(endpoints_[i], "unexpected reply to STATS");
    out.push_back(*reply);
  }
  return out;
}

}  // namespace shardex::net
