#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shardex/net/protocol.hpp"

namespace shardex::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port". Throws InvalidArgument.
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

std::vector<Endpoint> parse_endpoints(std::string_view commaSeparated);

class NetError : public Error {
 public:
  using Error::Error;
};

// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  static Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout);
  // Binds and listens; port 0 picks an ephemeral port.
  static Socket listen(const Endpoint& ep, int backlog = 128);

  // Returns an invalid socket once the listener has been shut down.
  Socket accept() const;
  void write_all(std::span<const std::uint8_t> data) const;
  // false on orderly EOF before the first byte; throws NetError on EOF
  // mid-buffer or socket errors.
  bool read_exact(std::span<std::uint8_t> out) const;
  // Wakes any thread blocked in accept/read on this socket.
  void shutdown() const;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  std::uint16_t local_port() const;

 private:
  int fd_ = -1;
};

// One frame from the stream; nullopt on orderly EOF at a frame boundary.
std::optional<Message> read_message(const Socket& s);
// Raw frame body (type byte onwards); nullopt on EOF.
std::optional<std::vector<std::uint8_t>> read_frame_body(const Socket& s);
void write_message(const Socket& s, const Message& m);

}  // namespace shardex::net
