// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <list>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "enclave.hpp"
#include "net.hpp"
#include "protocol.hpp"

namespace pct {

using LogSink = std::function<void(std::string_view)>;

// Writes timestamped lines to stderr.
LogSink stderr_log_sink();

struct Reply {
  MsgType type = MsgType::kError;
  Bytes body;
};

// Untrusted FIFO of sealed query frames. It never sees plaintext.
class RequestQueue {
 public:
  struct Pending {
    std::uint64_t seq = 0;
    Bytes frame;
    std::promise<Reply> reply;
    std::chrono::steady_clock::time_point enqueued;
  };

  std::future<Reply> push(Bytes frame);

  // Blocks until `count` requests are pending or the oldest has waited
  // `max_wait`, then takes at most `count` in arrival order. Returns an empty
  // batch after `idle` with nothing pending, or once closed.
  std::vector<Pending> take_batch(std::size_t count, std::chrono::milliseconds max_wait,
                                  std::chrono::milliseconds idle);

  void close();
  std::size_t size() const;
  // Hex of every pending frame, for audits of what the host can see.
  std::vector<std::string> dump() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Pending> pending_;
  std::uint64_t next_seq_ = 0;
  bool closed_ = false;
};

struct ServerConfig {
  std::string listen = "127.0.0.1:0";
  std::size_t batch_count = 1000;
  std::int64_t batch_wait_ms = 1000;
  std::string admin_socket;  // local-only command channel; empty disables it
  int io_timeout_ms = 60000;
  LogSink log;
};

struct ServerStats {
  std::uint64_t handshakes = 0;
  std::uint64_t queries = 0;
  std::uint64_t responses = 0;
  std::uint64_t errors = 0;
  std::uint64_t batches = 0;
  std::uint64_t reloads = 0;
};

// Untrusted host: accepts connections, queues sealed frames and hands
// batches to the enclave on a single worker thread.
class Server {
 public:
  Server(Enclave& enclave, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  ServerStats stats() const;

  // Swap in the manifest on disk before the next batch.
  void request_reload() { reload_requested_ = true; }
  const RequestQueue& queue() const { return queue_; }

 private:
  void accept_loop();
  void admin_loop();
  void batch_loop();
  void serve_connection(int fd);
  void log(const std::string& line) const;
  void apply_reload();

  Enclave& enclave_;
  ServerConfig config_;
  RequestQueue queue_;
  Socket listener_;
  Socket admin_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> reload_requested_{false};
  std::thread accept_thread_;
  std::thread admin_thread_;
  std::thread batch_thread_;

  mutable std::mutex conn_mu_;
  std::condition_variable conn_cv_;
  std::list<int> conn_fds_;
  std::size_t active_connections_ = 0;

  mutable std::mutex stats_mu_;
  ServerStats stats_;
};

}  // namespace pct
