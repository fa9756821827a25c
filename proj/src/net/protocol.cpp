#include "shardex/net/protocol.hpp"

#include "shardex/bytes.hpp"

namespace shardex::net {

namespace {

constexpr std::size_t kStatsReplyBytes = 9 * 8;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void encode_payload(ByteWriter& w, const Message& m) {
  std::visit(overloaded{
                 [&](const QueryMsg& q) {
                   w.u64(q.queryId);
                   w.u8(static_cast<std::uint8_t>(q.type));
                   w.u32(q.k);
                   if (q.keywords.size() > 0xFFFF) throw InvalidArgument("too many keywords");
                   w.u16(static_cast<std::uint16_t>(q.keywords.size()));
                   for (const auto& kw : q.keywords) w.str16(kw);
                   w.u8(q.scope ? 1 : 0);
                   if (q.scope) {
                     w.u8(static_cast<std::uint8_t>(q.scope->attr));
                     w.i64(q.scope->value);
                   }
                 },
                 [&](const TopKMsg& t) {
                   w.u64(t.queryId);
                   w.u64(t.processingMicros);
                   w.u32(static_cast<std::uint32_t>(t.items.size()));
                   for (const auto& item : t.items) {
                     w.str16(item.docKey);
                     w.f64(item.rank);
                   }
                 },
                 [&](const PingMsg&) {},
                 [&](const ErrorMsg& e) {
                   w.u64(e.queryId);
                   w.str(e.message);
                 },
                 [&](const StatsRequest& s) { w.u8(static_cast<std::uint8_t>(s.op)); },
                 [&](const StatsReply& s) {
                   for (auto v : {s.queries, s.errors, s.hits, s.misses, s.evictions, s.residentBytes, s.pinnedBytes,
                                  s.capacityBytes, s.dictionaryLookups}) {
                     w.u64(v);
                   }
                 },
             },
             m);
}

[[noreturn]] void malformed(const std::string& what) { throw ProtocolError(ProtocolError::Kind::malformed, what); }

Message decode_payload(MsgType type, ByteReader& r) {
  switch (type) {
    case MsgType::query: {
      QueryMsg q;
      q.queryId = r.u64();
      q.type = static_cast<ConditionType>(r.u8());
      q.k = r.u32();
      auto n = r.u16();
      q.keywords.reserve(n);
      for (std::uint16_t i = 0; i < n; ++i) q.keywords.push_back(r.str16());
      auto hasScope = r.u8();
      if (hasScope > 1) malformed("bad scope flag");
      if (hasScope) {
        auto attr = r.u8();
        if (attr != 1 && attr != 2) malformed("bad scope attribute");
        q.scope = ScopePredicate{static_cast<ScopeAttr>(attr), r.i64()};
      }
      return q;
    }
    case MsgType::topk: {
      TopKMsg t;
      t.queryId = r.u64();
      t.processingMicros = r.u64();
      auto n = r.u32();
      // Each item needs at least 10 bytes; reject counts the frame cannot hold.
      if (n > r.remaining() / 10) malformed("item count exceeds payload");
      t.items.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        RankedItem item;
        item.docKey = r.str16();
        item.rank = r.f64();
        if (!t.items.empty() && item.rank > t.items.back().rank) malformed("items not in rank order");
        t.items.push_back(std::move(item));
      }
      return t;
    }
    case MsgType::ping:
      return PingMsg{};
    case MsgType::error: {
      ErrorMsg e;
      e.queryId = r.u64();
      e.message = r.str();
      return e;
    }
    case MsgType::stats: {
      if (r.remaining() == 0) return StatsRequest{};
      if (r.remaining() == 1) {
        auto op = r.u8();
        if (op > 2) malformed("bad stats op");
        return StatsRequest{static_cast<StatsOp>(op)};
      }
      if (r.remaining() != kStatsReplyBytes) malformed("bad stats payload size");
      StatsReply s;
      for (auto* v : {&s.queries, &s.errors, &s.hits, &s.misses, &s.evictions, &s.residentBytes, &s.pinnedBytes,
                      &s.capacityBytes, &s.dictionaryLookups}) {
        *v = r.u64();
      }
      return s;
    }
  }
  throw ProtocolError(ProtocolError::Kind::badType, "unknown message type");
}

}  // namespace

MsgType type_of(const Message& m) {
  return std::visit(overloaded{
                        [](const QueryMsg&) { return MsgType::query; },
                        [](const TopKMsg&) { return MsgType::topk; },
                        [](const PingMsg&) { return MsgType::ping; },
                        [](const ErrorMsg&) { return MsgType::error; },
                        [](const StatsRequest&) { return MsgType::stats; },
                        [](const StatsReply&) { return MsgType::stats; },
                    },
                    m);
}

std::uint32_t check_length(std::uint32_t declared) {
  if (declared == 0) throw ProtocolError(ProtocolError::Kind::zeroLength, "frame declares length 0");
  if (declared > kMaxFrameLength) {
    throw ProtocolError(ProtocolError::Kind::overlength, "frame length " + std::to_string(declared) + " exceeds limit");
  }
  return declared;
}

std::vector<std::uint8_t> encode_frame(const Message& m) {
  ByteWriter payload;
  encode_payload(payload, m);
  const std::size_t length = payload.size() + 1;
  if (length > kMaxFrameLength) throw ProtocolError(ProtocolError::Kind::overlength, "message too large to frame");
  ByteWriter out;
  out.u32_be(static_cast<std::uint32_t>(length));
  out.u8(static_cast<std::uint8_t>(type_of(m)));
  out.bytes(payload.view());
  return out.take();
}

Message decode_body(std::span<const std::uint8_t> body) {
  if (body.empty()) throw ProtocolError(ProtocolError::Kind::zeroLength, "empty frame body");
  const auto raw = body[0];
  if (raw < 1 || raw > 5) throw ProtocolError(ProtocolError::Kind::badType, "unknown message type " + std::to_string(raw));
  ByteReader r(body.subspan(1));
  try {
    auto msg = decode_payload(static_cast<MsgType>(raw), r);
    if (!r.done()) malformed("trailing bytes in payload");
    return msg;
  } catch (const DecodeError&) {
    throw ProtocolError(ProtocolError::Kind::truncated, "payload shorter than its fields");
  }
}

Message decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ProtocolError(ProtocolError::Kind::truncated, "frame shorter than its length prefix");
  ByteReader r(bytes);
  const auto length = check_length(r.u32_be());
  if (bytes.size() - 4 < length) throw ProtocolError(ProtocolError::Kind::truncated, "frame truncated");
  if (bytes.size() - 4 > length) malformed("bytes after frame end");
  return decode_body(bytes.subspan(4, length));
}

}  // namespace shardex::net
