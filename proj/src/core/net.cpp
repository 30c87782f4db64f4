// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "net.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "error.hpp"

namespace pct {

namespace {

[[noreturn]] void fail_errno(const std::string& what) {
  fail(ErrorCode::kTransport, what + ": " + std::strerror(errno));
}

sockaddr_un unix_address(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path) fail(ErrorCode::kConfig, "unix socket path too long: " + path);
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

}  // namespace

HostPort parse_host_port(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    fail(ErrorCode::kConfig, "address '" + address + "' must be host:port");
  }
  HostPort hp;
  hp.host = address.substr(0, colon);
  if (hp.host.size() >= 2 && hp.host.front() == '[' && hp.host.back() == ']') hp.host = hp.host.substr(1, hp.host.size() - 2);
  if (hp.host.empty()) hp.host = "0.0.0.0";
  const char* p = address.data() + colon + 1;
  const char* end = address.data() + address.size();
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(p, end, port);
  if (ec != std::errc{} || ptr != end || port > 65535) fail(ErrorCode::kConfig, "bad port in '" + address + "'");
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void set_io_timeout(int fd, int timeout_ms) {
  if (timeout_ms <= 0) return;
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

Socket connect_tcp(const std::string& address, int timeout_ms) {
  const HostPort hp = parse_host_port(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  if (const int rc = getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    fail(ErrorCode::kTransport, "cannot resolve " + hp.host + ": " + gai_strerror(rc));
  }
  std::string last = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    set_io_timeout(s.fd(), timeout_ms);
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      freeaddrinfo(res);
      const int one = 1;
      setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    last = std::strerror(errno);
  }
  freeaddrinfo(res);
  fail(ErrorCode::kTransport, "cannot connect to " + address + ": " + last);
}

Socket listen_tcp(const std::string& address, int backlog, std::uint16_t* bound_port) {
  const HostPort hp = parse_host_port(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  if (const int rc = getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    fail(ErrorCode::kTransport, "cannot resolve " + hp.host + ": " + gai_strerror(rc));
  }
  Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  if (!s.valid()) {
    freeaddrinfo(res);
    fail_errno("socket");
  }
  const int one = 1;
  setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), res->ai_addr, res->ai_addrlen) != 0) {
    freeaddrinfo(res);
    fail_errno("cannot bind " + address);
  }
  freeaddrinfo(res);
  if (::listen(s.fd(), backlog) != 0) fail_errno("listen");
  if (bound_port) {
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    getsockname(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len);
    *bound_port = ss.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port)
                                           : ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
  }
  return s;
}

Socket listen_unix(const std::string& path) {
  const sockaddr_un addr = unix_address(path);
  Socket s(::socket(AF_UNIX, SOCK_STREAM, 0));
  if (!s.valid()) fail_errno("socket");
  ::unlink(path.c_str());
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) fail_errno("cannot bind " + path);
  if (::listen(s.fd(), 4) != 0) fail_errno("listen");
  return s;
}

Socket connect_unix(const std::string& path, int timeout_ms) {
  const sockaddr_un addr = unix_address(path);
  Socket s(::socket(AF_UNIX, SOCK_STREAM, 0));
  if (!s.valid()) fail_errno("socket");
  set_io_timeout(s.fd(), timeout_ms);
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    fail_errno("cannot connect to " + path);
  }
  return s;
}

void write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_errno("send");
    }
    off += static_cast<std::size_t>(n);
  }
}

bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t r = ::recv(fd, out + off, n - off, 0);
    if (r == 0) {
      if (off == 0) return false;
      fail(ErrorCode::kTransport, "connection closed mid-message");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) fail(ErrorCode::kTransport, "read timed out");
      fail_errno("recv");
    }
    off += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace pct
