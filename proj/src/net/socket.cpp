#include "shardex/net/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

namespace shardex::net {

namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) ::freeaddrinfo(head);
  }
};

AddrInfo resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo out;
  const auto port = std::to_string(ep.port);
  int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &out.head);
  if (rc != 0) throw NetError(ep.str() + ": " + ::gai_strerror(rc));
  return out;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw InvalidArgument("endpoint '" + std::string(text) + "' lacks :port");
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  auto portText = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
  if (ec != std::errc() || ptr != portText.data() + portText.size() || port > 65535) {
    throw InvalidArgument("bad port in endpoint '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

std::vector<Endpoint> parse_endpoints(std::string_view commaSeparated) {
  std::vector<Endpoint> out;
  std::size_t start = 0;
  while (start <= commaSeparated.size()) {
    auto comma = commaSeparated.find(',', start);
    auto part = commaSeparated.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!part.empty()) out.push_back(Endpoint::parse(part));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Socket::Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

Socket Socket::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  auto info = resolve(ep, false);
  std::string lastError = "no addresses";
  for (auto* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) {
      lastError = errno_text("socket");
      continue;
    }
    int flags = ::fcntl(s.fd(), F_GETFL);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{s.fd(), POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      if (rc == 0) {
        lastError = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        lastError = std::string("connect: ") + std::strerror(err);
        continue;
      }
      rc = 0;
    }
    if (rc != 0) {
      lastError = errno_text("connect");
      continue;
    }
    ::fcntl(s.fd(), F_SETFL, flags);
    set_nodelay(s.fd());
    return s;
  }
  throw NetError(ep.str() + ": " + lastError);
}

Socket Socket::listen(const Endpoint& ep, int backlog) {
  auto info = resolve(ep, true);
  std::string lastError = "no addresses";
  for (auto* ai = info.head; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(s.fd(), backlog) != 0) {
      lastError = errno_text("bind/listen");
      continue;
    }
    return s;
  }
  throw NetError(ep.str() + ": " + lastError);
}

Socket Socket::accept() const {
  while (true) {
    int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      set_nodelay(fd);
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return Socket();
  }
}

void Socket::write_all(std::span<const std::uint8_t> data) const {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::send(fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("send"));
    }
    done += static_cast<std::size_t>(n);
  }
}

bool Socket::read_exact(std::span<std::uint8_t> out) const {
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t n = ::recv(fd_, out.data() + done, out.size() - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(errno_text("recv"));
    }
    if (n == 0) {
      if (done == 0) return false;
      throw NetError("connection closed mid-frame");
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

void Socket::shutdown() const {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::uint16_t Socket::local_port() const {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) throw NetError(errno_text("getsockname"));
  if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
}

std::optional<std::vector<std::uint8_t>> read_frame_body(const Socket& s) {
  std::uint8_t prefix[4];
  if (!s.read_exact(prefix)) return std::nullopt;
  const std::uint32_t length =
      check_length((std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                   (std::uint32_t{prefix[2]} << 8) | std::uint32_t{prefix[3]});
  std::vector<std::uint8_t> body(length);
  if (!s.read_exact(body)) throw NetError("connection closed mid-frame");
  return body;
}

std::optional<Message> read_message(const Socket& s) {
  auto body = read_frame_body(s);
  if (!body) return std::nullopt;
  return decode_body(*body);
}

void write_message(const Socket& s, const Message& m) { s.write_all(encode_frame(m)); }

}  // namespace shardex::net
