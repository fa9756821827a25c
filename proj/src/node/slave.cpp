#include "shardex/node/slave.hpp"

#include "shardex/qlang/query.hpp"

namespace shardex::node {

Slave::Slave(std::shared_ptr<const ir::IndexReader> index, SlaveOptions options)
    : index_(std::move(index)), options_(options) {
  if (!index_) throw InvalidArgument("slave needs an index");
}

Slave::Slave(std::shared_ptr<storage::DiskIndex> index, SlaveOptions options)
    : index_(index), disk_(std::move(index)), options_(options) {
  if (!index_) throw InvalidArgument("slave needs an index");
}

net::Message Slave::handle_query(const net::QueryMsg& msg, Clock::time_point receivedAt) {
  queries_.fetch_add(1);
  const auto raw = static_cast<unsigned>(msg.type);
  if (raw < 1 || raw > 3) {
    errors_.fetch_add(1);
    return net::ErrorMsg{msg.queryId, "unknown condition type " + std::to_string(raw)};
  }
  net::TopKMsg reply;
  reply.queryId = msg.queryId;
  try {
    qlang::validate(qlang::Query{msg.type, msg.keywords, msg.scope, msg.k});
    auto hits = ir::search_conjunctive(*index_, msg.keywords, msg.scope, msg.k, options_.strategy);
    reply.items.reserve(hits.size());
    for (auto& h : hits) reply.items.push_back({std::move(h.docKey), h.rank});
  } catch (const Error& e) {
    errors_.fetch_add(1);
    return net::ErrorMsg{msg.queryId, e.what()};
  }
  auto delay = options_.processingDelay;
  if (auto it = options_.delayByK.find(msg.k); it != options_.delayByK.end()) delay += it->second;
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  reply.processingMicros = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - receivedAt).count());
  if (options_.transferDelay.count() > 0) std::this_thread::sleep_for(options_.transferDelay);
  return reply;
}

net::StatsReply Slave::stats(net::StatsOp op) {
  if (op == net::StatsOp::resetCounters) {
    queries_.store(0);
    errors_.store(0);
    if (disk_) disk_->reset_counters();
  } else if (op == net::StatsOp::dropCache) {
    if (disk_) disk_->drop_cache();
  }
  net::StatsReply r;
  r.queries = queries_.load();
  r.errors = errors_.load();
  if (disk_) {
    const auto b = disk_->buffer_stats();
    r.hits = b.hits;
    r.misses = b.misses;
    r.evictions = b.evictions;
    r.residentBytes = b.residentBytes;
    r.pinnedBytes = b.pinnedBytes;
    r.capacityBytes = b.capacityBytes;
    r.dictionaryLookups = b.dictionaryLookups;
  }
  return r;
}

void SlaveServer::Conn::send(const net::Message& m) {
  std::lock_guard lock(writeMu);
  try {
    net::write_message(sock, m);
  } catch (const net::NetError&) {
    // Peer went away; its reader thread will notice.
  }
}

SlaveServer::SlaveServer(std::shared_ptr<Slave> slave, SlaveServerOptions options)
    : slave_(std::move(slave)), options_(std::move(options)) {
  if (options_.concurrency == 0) throw InvalidArgument("concurrency must be >= 1");
}

SlaveServer::~SlaveServer() { stop(); }

void SlaveServer::start() {
  if (started_) return;
  listener_ = net::Socket::listen(options_.listen);
  port_ = listener_.local_port();
  started_ = true;
  for (unsigned i = 0; i < options_.concurrency; ++i) workers_.emplace_back([this] { worker_loop(); });
  acceptor_ = std::thread([this] { accept_loop(); });
}

void SlaveServer::stop() {
  if (!started_) return;
  started_ = false;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(jobMu_);
    stopping_ = true;
  }
  jobCv_.notify_all();
  for (auto& w : workers_) w.join();
  workers_.clear();

  std::list<std::thread> readers;
  {
    std::lock_guard lock(connMu_);
    for (auto& c : conns_) c->sock.shutdown();
    readers.swap(readers_);
  }
  for (auto& r : readers) r.join();
  conns_.clear();
}

void SlaveServer::accept_loop() {
  while (true) {
    net::Socket s = listener_.accept();
    if (!s.valid()) return;
    auto conn = std::make_shared<Conn>();
    conn->sock = std::move(s);
    std::lock_guard lock(connMu_);
    conns_.push_back(conn);
    readers_.emplace_back([this, conn] { read_loop(conn); });
  }
}

void SlaveServer::read_loop(std::shared_ptr<Conn> conn) {
  while (true) {
    std::optional<std::vector<std::uint8_t>> body;
    try {
      body = net::read_frame_body(conn->sock);
    } catch (const net::ProtocolError& e) {
      // Bad length prefix: the stream cannot be resynchronized.
      slave_->count_error();
      conn->send(net::ErrorMsg{0, e.what()});
      break;
    } catch (const std::exception&) {
      break;
    }
    if (!body) break;
    const auto receivedAt = Clock::now();

    net::Message msg;
    try {
      msg = net::decode_body(*body);
    } catch (const net::ProtocolError& e) {
      slave_->count_error();
      conn->send(net::ErrorMsg{0, e.what()});
      continue;
    }

    if (auto* q = std::get_if<net::QueryMsg>(&msg)) {
      {
        std::lock_guard lock(jobMu_);
        jobs_.push_back({conn, std::move(*q), receivedAt});
      }
      jobCv_.notify_one();
    } else if (std::holds_alternative<net::PingMsg>(msg)) {
      conn->send(net::PingMsg{});
    } else if (auto* s = std::get_if<net::StatsRequest>(&msg)) {
      conn->send(slave_->stats(s->op));
    } else {
      slave_->count_error();
      conn->send(net::ErrorMsg{0, "unexpected message type"});
    }
  }
  conn->sock.shutdown();
}

void SlaveServer::worker_loop() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(jobMu_);
      jobCv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
      if (jobs_.empty()) return;
      job = std::move(jobs_.front());
      jobs_.pop_front();
    }
    job.conn->send(slave_->handle_query(job.query, job.receivedAt));
  }
}

}  // namespace shardex::node
