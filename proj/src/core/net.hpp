// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace pct {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

// "host:port" or "[v6]:port"; throws kConfig.
HostPort parse_host_port(const std::string& address);

// Owns a file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  // Wakes any thread blocked on this socket without releasing the descriptor.
  void shutdown();

 private:
  int fd_ = -1;
};

// Throws kTransport on failure. timeout_ms also bounds every later read/write.
Socket connect_tcp(const std::string& address, int timeout_ms);
Socket listen_tcp(const std::string& address, int backlog, std::uint16_t* bound_port);
Socket listen_unix(const std::string& path);
Socket connect_unix(const std::string& path, int timeout_ms);
void set_io_timeout(int fd, int timeout_ms);

void write_all(int fd, std::span<const std::uint8_t> data);
// Returns false on EOF before the first byte; throws kTransport on a short
// read, an error or a timeout.
bool read_exact(int fd, std::uint8_t* out, std::size_t n);

}  // namespace pct
