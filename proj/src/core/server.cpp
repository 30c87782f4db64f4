// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "server.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <iostream>

namespace pct {

namespace {

std::string hex(std::span<const std::uint8_t> b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s += kDigits[x >> 4];
    s += kDigits[x & 15];
  }
  return s;
}

}  // namespace

LogSink stderr_log_sink() {
  return [](std::string_view line) {
    char ts[32];
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    std::cerr << ts << ' ' << line << '\n';
  };
}

std::future<Reply> RequestQueue::push(Bytes frame) {
  std::lock_guard lock(mu_);
  if (closed_) fail(ErrorCode::kTransport, "server is shutting down");
  Pending p;
  p.seq = next_seq_++;
  p.frame = std::move(frame);
  p.enqueued = std::chrono::steady_clock::now();
  auto f = p.reply.get_future();
  pending_.push_back(std::move(p));
  cv_.notify_all();
  return f;
}

std::vector<RequestQueue::Pending> RequestQueue::take_batch(std::size_t count, std::chrono::milliseconds max_wait,
                                                            std::chrono::milliseconds idle) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, idle, [&] { return closed_ || !pending_.empty(); })) return {};
  if (closed_) return {};
  const auto deadline = pending_.front().enqueued + max_wait;
  cv_.wait_until(lock, deadline, [&] { return closed_ || pending_.size() >= count; });
  if (closed_) return {};
  std::vector<Pending> batch;
  const std::size_t n = std::min(count, pending_.size());
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.push_back(std::move(pending_.front()));
    pending_.pop_front();
  }
  return batch;
}

void RequestQueue::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  for (auto& p : pending_) p.reply.set_value(Reply{MsgType::kError, {}});
  pending_.clear();
  cv_.notify_all();
}

std::size_t RequestQueue::size() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

std::vector<std::string> RequestQueue::dump() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& p : pending_) out.push_back(std::to_string(p.seq) + " " + hex(p.frame));
  return out;
}

Server::Server(Enclave& enclave, ServerConfig config) : enclave_(enclave), config_(std::move(config)) {
  if (config_.batch_count == 0) fail(ErrorCode::kConfig, "batch count must be >= 1");
  if (config_.batch_wait_ms < 0) fail(ErrorCode::kConfig, "batch wait must be >= 0");
}

Server::~Server() { stop(); }

void Server::log(const std::string& line) const {
  if (config_.log) config_.log(line);
}

void Server::start() {
  listener_ = listen_tcp(config_.listen, 128, &port_);
  if (!config_.admin_socket.empty()) admin_ = listen_unix(config_.admin_socket);
  running_ = true;
  batch_thread_ = std::thread([this] { batch_loop(); });
  accept_thread_ = std::thread([this] { accept_loop(); });
  if (admin_.valid()) admin_thread_ = std::thread([this] { admin_loop(); });
  log("listening port=" + std::to_string(port_) + " theta_key_length=" + std::to_string(enclave_.theta().key_length()) +
      " corpus_keys=" + std::to_string(enclave_.corpus_key_count()) + " batch_count=" +
      std::to_string(config_.batch_count) + " batch_wait_ms=" + std::to_string(config_.batch_wait_ms));
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  admin_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (admin_thread_.joinable()) admin_thread_.join();
  queue_.close();
  if (batch_thread_.joinable()) batch_thread_.join();
  {
    std::unique_lock lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    conn_cv_.wait(lock, [&] { return active_connections_ == 0; });
  }
  listener_.close();
  admin_.close();
  if (!config_.admin_socket.empty()) ::unlink(config_.admin_socket.c_str());
  log("stopped");
}

ServerStats Server::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      if (errno == EINVAL) break;  // listener shut down
      continue;
    }
    set_io_timeout(fd, config_.io_timeout_ms);
    std::list<int>::iterator it;
    {
      std::lock_guard lock(conn_mu_);
      it = conn_fds_.insert(conn_fds_.end(), fd);
      ++active_connections_;
    }
    std::thread([this, fd, it] {
      serve_connection(fd);
      std::lock_guard lock(conn_mu_);
      ::close(fd);
      conn_fds_.erase(it);
      --active_connections_;
      conn_cv_.notify_all();
    }).detach();
  }
}

void Server::serve_connection(int fd) {
  auto count = [&](auto field) {
    std::lock_guard lock(stats_mu_);
    ++(stats_.*field);
  };
  try {
    while (running_) {
      auto msg = recv_message(fd);
      if (!msg) return;
      switch (msg->type) {
        case MsgType::kHandshake: {
          const Bytes resp = enclave_.handshake(msg->body);
          count(&ServerStats::handshakes);
          send_message(fd, MsgType::kHandshakeResp, resp);
          break;
        }
        case MsgType::kQuery: {
          if (!enclave_.has_session(msg->body)) {
            count(&ServerStats::errors);
            log("rejected query without a live session");
            send_error(fd, ErrorCode::kProtocol, "query before handshake");
            return;
          }
          count(&ServerStats::queries);
          auto future = queue_.push(std::move(msg->body));
          const Reply reply = future.get();
          if (reply.type == MsgType::kError && reply.body.empty()) {
            send_error(fd, ErrorCode::kTransport, "server shutting down");
            return;
          }
          send_message(fd, reply.type, reply.body);
          count(reply.type == MsgType::kResponse ? &ServerStats::responses : &ServerStats::errors);
          break;
        }
        default:
          count(&ServerStats::errors);
          send_error(fd, ErrorCode::kProtocol, "unexpected message type from client");
          return;
      }
    }
  } catch (const Error& e) {
    count(&ServerStats::errors);
    log(std::string("connection closed: ") + error_code_name(e.code()));
    if (e.code() != ErrorCode::kTransport) {
      try {
        send_error(fd, e.code(), e.what());
      } catch (const Error&) {
      }
    }
  }
}

void Server::apply_reload() {
  if (!reload_requested_.exchange(false)) return;
  try {
    enclave_.reload();
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.reloads;
    }
    log("manifest reloaded generation=" + std::to_string(enclave_.generation()) +
        " corpus_keys=" + std::to_string(enclave_.corpus_key_count()));
  } catch (const Error& e) {
    log(std::string("manifest reload failed, keeping the previous corpus: ") + e.what());
  }
}

void Server::batch_loop() {
  using std::chrono::milliseconds;
  while (running_) {
    apply_reload();
    auto batch = queue_.take_batch(config_.batch_count, milliseconds(config_.batch_wait_ms), milliseconds(200));
    if (batch.empty()) {
      enclave_.purge_sessions();
      continue;
    }
    // A reload requested while waiting applies to this batch, never mid-batch.
    apply_reload();
    std::vector<Bytes> frames;
    frames.reserve(batch.size());
    for (auto& p : batch) frames.push_back(std::move(p.frame));
    BatchReport report;
    auto results = enclave_.process_batch(frames, &report);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Reply r;
      if (results[i].ok) {
        r.type = MsgType::kResponse;
        r.body = std::move(results[i].frame);
      } else {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(results[i].error));
        w.raw(results[i].message);
        r.type = MsgType::kError;
        r.body = w.take();
      }
      batch[i].reply.set_value(std::move(r));
    }
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.batches;
    }
    log("batch n_c=" + std::to_string(report.clients) + " n_q=" + std::to_string(report.unique_keys) +
        " n_d=" + std::to_string(report.chunks) + " probes=" + std::to_string(report.probe_count) +
        " peak_trusted_bytes=" + std::to_string(report.peak_trusted_bytes) + " psi_ms=" + std::to_string(report.psi_ms));
  }
}

void Server::admin_loop() {
  while (running_) {
    const int fd = ::accept(admin_.fd(), nullptr, nullptr);
    if (fd < 0) {
      if (!running_ || errno == EINVAL) break;
      continue;
    }
    Socket conn(fd);
    set_io_timeout(fd, 5000);
    char buf[64];
    const ssize_t n = ::recv(fd, buf, sizeof buf - 1, 0);
    if (n <= 0) continue;
    std::string cmd(buf, static_cast<std::size_t>(n));
    while (!cmd.empty() && (cmd.back() == '\n' || cmd.back() == '\r')) cmd.pop_back();
    std::string reply;
    if (cmd == "reload") {
      request_reload();
      reply = "ok reload scheduled\n";
    } else if (cmd == "stats") {
      const auto s = stats();
      reply = "handshakes=" + std::to_string(s.handshakes) + " queries=" + std::to_string(s.queries) +
              " responses=" + std::to_string(s.responses) + " errors=" + std::to_string(s.errors) +
              " batches=" + std::to_string(s.batches) + " reloads=" + std::to_string(s.reloads) +
              " pending=" + std::to_string(queue_.size()) + " generation=" + std::to_string(enclave_.generation()) +
              "\n";
    } else {
      reply = "error unknown command\n";
    }
    try {
      write_all(fd, std::span(reinterpret_cast<const std::uint8_t*>(reply.data()), reply.size()));
    } catch (const Error&) {
    }
  }
}

}  // namespace pct
