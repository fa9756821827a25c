#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shardex/error.hpp"
#include "shardex/types.hpp"

namespace shardex::net {

// Frame: u32 length (network byte order) | u8 msgType | payload.
// length counts the type byte plus the payload.
enum class MsgType : std::uint8_t { query = 1, topk = 2, ping = 3, error = 4, stats = 5 };

inline constexpr std::uint32_t kMaxFrameLength = 16u << 20;
inline constexpr std::size_t kFrameHeaderBytes = 5;

struct QueryMsg {
  std::uint64_t queryId = 0;
  // Carried as sent; receivers validate it.
  ConditionType type = ConditionType::single;
  std::vector<std::string> keywords;
  std::optional<ScopePredicate> scope;
  std::uint32_t k = 10;

  friend bool operator==(const QueryMsg&, const QueryMsg&) = default;
};

struct TopKMsg {
  std::uint64_t queryId = 0;
  // Wall time the responder spent on the request, in microseconds.
  std::uint64_t processingMicros = 0;
  std::vector<RankedItem> items;  // rank non-increasing

  friend bool operator==(const TopKMsg&, const TopKMsg&) = default;
};

struct PingMsg {
  friend bool operator==(const PingMsg&, const PingMsg&) = default;
};

struct ErrorMsg {
  std::uint64_t queryId = 0;  // 0 when the failing request had none
  std::string message;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

enum class StatsOp : std::uint8_t { read = 0, resetCounters = 1, dropCache = 2 };

// STATS with a 0- or 1-byte payload.
struct StatsRequest {
  StatsOp op = StatsOp::read;
  friend bool operator==(const StatsRequest&, const StatsRequest&) = default;
};

// STATS with a fixed 72-byte payload (nine u64 counters). Counters reflect
// state after the request's op was applied.
struct StatsReply {
  std::uint64_t queries = 0;
  std::uint64_t errors = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t residentBytes = 0;
  std::uint64_t pinnedBytes = 0;
  std::uint64_t capacityBytes = 0;
  std::uint64_t dictionaryLookups = 0;

  friend bool operator==(const StatsReply&, const StatsReply&) = default;
};

using Message = std::variant<QueryMsg, TopKMsg, PingMsg, ErrorMsg, StatsRequest, StatsReply>;

class ProtocolError : public Error {
 public:
  enum class Kind { truncated, zeroLength, overlength, badType, malformed };
  ProtocolError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

MsgType type_of(const Message& m);

std::vector<std::uint8_t> encode_frame(const Message& m);

// Decodes exactly one complete frame; trailing bytes are malformed.
Message decode_frame(std::span<const std::uint8_t> bytes);

// Validates the 4-byte length prefix and returns the payload-plus-type
// length. Throws ProtocolError for 0 or > kMaxFrameLength.
std::uint32_t check_length(std::uint32_t declared);

// Decodes a frame body (type byte onwards).
Message decode_body(std::span<const std::uint8_t> body);

}  // namespace shardex::net
