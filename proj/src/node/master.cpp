#include "shardex/node/master.hpp"

#include <algorithm>

namespace shardex::node {

namespace {

using Ms = std::chrono::duration<double, std::milli>;

double ms(net::Micros d) { return Ms(d).count(); }

}  // namespace

double TimingBreakdown::slave_max_ms() const {
  double m = 0;
  for (const auto& s : slaves) m = std::max(m, s.slaveMs);
  return m;
}

double TimingBreakdown::round_trip_max_ms() const {
  double m = 0;
  for (const auto& s : slaves) m = std::max(m, s.roundTripMs);
  return m;
}

net::QueryMsg to_message(const qlang::Query& q) {
  net::QueryMsg m;
  m.type = q.type;
  m.keywords = q.keywords;
  m.scope = q.scope;
  m.k = q.k;
  return m;
}

Master::Master(std::vector<net::Endpoint> slaves, net::FanoutOptions options) : client_(std::move(slaves), options) {}

QueryResult Master::execute(const qlang::Query& query) {
  const auto start = net::Clock::now();
  qlang::validate(query);
  auto fan = client_.call(to_message(query));

  QueryResult out;
  auto& t = out.timing;
  t.fanoutMs = ms(fan.elapsed);
  t.slaves.reserve(fan.replies.size());
  std::vector<MergeStream> streams;
  streams.reserve(fan.replies.size());
  for (std::size_t i = 0; i < fan.replies.size(); ++i) {
    const auto& r = fan.replies[i];
    SlaveTiming st;
    st.masterMs = ms(r.master_time());
    st.slaveMs = static_cast<double>(r.reply.processingMicros) / 1000.0;
    st.roundTripMs = ms(r.round_trip());
    st.networkMs = std::max(0.0, st.roundTripMs - st.masterMs - st.slaveMs);
    t.slaves.push_back(st);
    streams.push_back({static_cast<std::uint32_t>(i), r.reply.items});
  }

  const auto mergeStart = net::Clock::now();
  out.items = loser_tree_merge(streams, query.k, &out.merge);
  const auto end = net::Clock::now();
  t.mergeMs = ms(end - mergeStart);
  t.totalMs = ms(end - start);
  return out;
}

QueryResult Master::execute_text(std::string_view text) {
  const auto start = net::Clock::now();
  const auto query = qlang::parse_query(text);
  const double parseMs = ms(net::Clock::now() - start);
  auto out = execute(query);
  out.timing.parseMs = parseMs;
  out.timing.totalMs += parseMs;
  return out;
}

MasterServer::MasterServer(std::shared_ptr<Master> master, net::Endpoint listen)
    : master_(std::move(master)), listen_(std::move(listen)) {}

MasterServer::~MasterServer() { stop(); }

void MasterServer::start() {
  if (started_) return;
  listener_ = net::Socket::listen(listen_);
  port_ = listener_.local_port();
  started_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void MasterServer::stop() {
  if (!started_) return;
  started_ = false;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> handlers;
  {
    std::lock_guard lock(connMu_);
    for (auto& c : conns_) c->shutdown();
    handlers.swap(handlers_);
  }
  for (auto& h : handlers) h.join();
  conns_.clear();
}

void MasterServer::accept_loop() {
  while (true) {
    auto sock = std::make_shared<net::Socket>(listener_.accept());
    if (!sock->valid()) return;
    std::lock_guard lock(connMu_);
    conns_.push_back(sock);
    handlers_.emplace_back([this, sock] { serve(sock); });
  }
}

void MasterServer::serve(std::shared_ptr<net::Socket> sock) {
  try {
    while (auto msg = net::read_message(*sock)) {
      if (auto* q = std::get_if<net::QueryMsg>(&*msg)) {
        const auto start = net::Clock::now();
        try {
          qlang::Query query{q->type, q->keywords, q->scope, q->k};
          auto result = master_->execute(query);
          net::TopKMsg reply;
          reply.queryId = q->queryId;
          reply.items.reserve(result.items.size());
          for (auto& item : result.items) reply.items.push_back({std::move(item.docKey), item.rank});
          reply.processingMicros = static_cast<std::uint64_t>(
              std::chrono::duration_cast<std::chrono::microseconds>(net::Clock::now() - start).count());
          net::write_message(*sock, reply);
        } catch (const Error& e) {
          net::write_message(*sock, net::ErrorMsg{q->queryId, e.what()});
        }
      } else if (std::holds_alternative<net::PingMsg>(*msg)) {
        net::write_message(*sock, net::PingMsg{});
      } else {
        net::write_message(*sock, net::ErrorMsg{0, "master accepts QUERY and PING only"});
      }
    }
  } catch (const std::exception&) {
    // Broken or malformed stream: drop the connection.
  }
  sock->shutdown();
}

}  // namespace shardex::node
