// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/socket.h>

#include <atomic>
#include <set>
#include <thread>

#include "chunk_builder.hpp"
#include "client.hpp"
#include "enclave.hpp"
#include "error.hpp"
#include "generator.hpp"
#include "net.hpp"
#include "oracles.hpp"
#include "protocol.hpp"
#include "server.hpp"
#include "temp_dir.hpp"

using namespace pct;
using testing::TempDir;

namespace {

Theta service_theta() {
  Theta t;
  t.geo_digits = 8;
  t.period_start = 1600000000;
  t.period_end = 1600000000 + 86400;
  t.segment_seconds = 900;
  t.time_width = 3;
  return t;
}

std::vector<TrajectoryPoint> person(std::uint64_t seed, std::size_t n = 40) {
  GeneratorConfig g;
  g.points_per_person = n;
  g.interval_seconds = 86400 / static_cast<std::int64_t>(n);
  g.start_time = 1600000000;
  g.seed = seed;
  return generate_people(g)[0];
}

void build_corpus(const std::string& dir, const std::vector<TrajectoryPoint>& points, std::uint64_t entries = 16) {
  BuildOptions o;
  o.theta = service_theta();
  o.chunk_entries = entries;
  o.out_dir = dir;
  map_to_chunked_dictionary(points, o);
}

// Plaintext oracle: contact iff some point shares a cell and segment with a
// corpus point.
bool oracle_contact(const std::vector<TrajectoryPoint>& client, const std::vector<TrajectoryPoint>& corpus) {
  const Theta t = service_theta();
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::int64_t>> cells;
  auto in_period = [&](const TrajectoryPoint& p) { return p.t >= t.period_start && p.t < t.period_end; };
  for (const auto& p : corpus) {
    if (!in_period(p)) continue;
    const auto c = oracle::geo_cell(p.lat, p.lon, t.geo_digits);
    cells.emplace(c.lon_idx, c.lat_idx, (p.t - t.period_start) / t.segment_seconds);
  }
  for (const auto& p : client) {
    if (!in_period(p)) continue;
    const auto c = oracle::geo_cell(p.lat, p.lon, t.geo_digits);
    if (cells.count({c.lon_idx, c.lat_idx, (p.t - t.period_start) / t.segment_seconds})) return true;
  }
  return false;
}

struct LogCapture {
  std::mutex mu;
  std::vector<std::string> lines;
  LogSink sink() {
    return [this](std::string_view l) {
      std::lock_guard lock(mu);
      lines.emplace_back(l);
    };
  }
};

struct Running {
  TempDir dir;
  LogCapture logs;
  std::unique_ptr<Enclave> enclave;
  std::unique_ptr<Server> server;

  Running(const std::vector<TrajectoryPoint>& corpus, std::size_t batch_count = 8, std::int64_t wait_ms = 50,
          EnclaveConfig ec = {}) {
    build_corpus(dir.path(), corpus);
    enclave = std::make_unique<Enclave>(dir.path(), ec);
    ServerConfig sc;
    sc.batch_count = batch_count;
    sc.batch_wait_ms = wait_ms;
    sc.admin_socket = dir.sub("admin.sock");
    sc.log = logs.sink();
    server = std::make_unique<Server>(*enclave, sc);
    server->start();
  }
  std::string address() const { return "127.0.0.1:" + std::to_string(server->port()); }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::string to_hex(std::string_view s) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    out += kDigits[c >> 4];
    out += kDigits[c & 15];
  }
  return out;
}

}  // namespace

TEST_CASE("one client whose trajectory crosses a corpus cell gets contact=true") {
  auto corpus = person(1);
  auto client = person(2);
  client[5] = corpus[10];
  Running r(corpus, 1);
  const auto out = client_query(r.address(), client);
  CHECK(out.response.status == ResponseStatus::kOk);
  CHECK(out.response.contact);
  CHECK(out.response.matched_count >= 1);
  CHECK(out.theta == service_theta());
  CHECK(out.measurement == r.enclave->measurement());
  CHECK(oracle_contact(client, corpus));
}

TEST_CASE("a query against an empty corpus answers contact=false") {
  Running r({}, 1);
  const auto out = client_query(r.address(), person(3));
  CHECK_FALSE(out.response.contact);
  CHECK(out.response.matched_count == 0);
}

TEST_CASE("an empty trajectory fails before any network traffic") {
  CHECK(code_of([] { client_query("127.0.0.1:1", {}); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("an unreachable server is a transport error") {
  CHECK(code_of([] { client_query("127.0.0.1:1", person(1, 3), {.timeout_ms = 2000}); }) == ErrorCode::kTransport);
}

TEST_CASE("a query before the handshake gets a protocol error frame") {
  Running r(person(1), 1);
  Socket s = connect_tcp(r.address(), 5000);
  send_message(s.fd(), MsgType::kQuery, Bytes(60, 0x11));
  const auto reply = recv_message(s.fd());
  REQUIRE(reply);
  CHECK(reply->type == MsgType::kError);
  CHECK(code_of([&] { raise_error_message(reply->body); }) == ErrorCode::kProtocol);
  // The connection is closed after the violation, but the server keeps serving.
  CHECK_FALSE(recv_message(s.fd()));
  CHECK_NOTHROW(client_query(r.address(), person(2)));
}

TEST_CASE("unknown message types and oversized bodies are protocol errors") {
  Running r(person(1), 1);
  Socket s = connect_tcp(r.address(), 5000);
  const Bytes junk = {0x55, 0, 0, 0, 0};
  write_all(s.fd(), junk);
  auto reply = recv_message(s.fd());
  REQUIRE(reply);
  CHECK(reply->type == MsgType::kError);
  Socket s2 = connect_tcp(r.address(), 5000);
  const Bytes huge = {0x03, 0xff, 0xff, 0xff, 0xff};
  write_all(s2.fd(), huge);
  reply = recv_message(s2.fd());
  REQUIRE(reply);
  CHECK(reply->type == MsgType::kError);
}

TEST_CASE("many concurrent clients are each answered exactly once, matching the oracle") {
  std::vector<TrajectoryPoint> corpus;
  for (std::uint64_t s = 100; s < 110; ++s)
    for (const auto& p : person(s)) corpus.push_back(p);
  Running r(corpus, 16, 100);
  constexpr int kClients = 64;
  std::vector<std::vector<TrajectoryPoint>> clients(kClients);
  std::vector<int> expected(kClients), got(kClients, -1);
  for (int i = 0; i < kClients; ++i) {
    clients[i] = person(1000 + i);
    if (i % 3 == 0) clients[i][i % 40] = corpus[static_cast<std::size_t>(i * 7) % corpus.size()];
    expected[i] = oracle_contact(clients[i], corpus);
  }
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int i = 0; i < kClients; ++i) {
    threads.emplace_back([&, i] {
      try {
        got[i] = client_query(r.address(), clients[i]).response.contact;
      } catch (const Error&) {
        ++failures;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(failures == 0);
  CHECK(got == expected);
  const auto stats = r.server->stats();
  CHECK(stats.queries == kClients);
  CHECK(stats.responses == kClients);
  CHECK(stats.batches >= kClients / 16);
}

TEST_CASE("a response does not depend on which clients share the batch") {
  auto corpus = person(7);
  auto client = person(8);
  client[0] = corpus[3];
  client[1] = corpus[20];
  Running solo(corpus, 1, 10);
  Running crowded(corpus, 32, 300);
  const auto a = client_query(solo.address(), client).response;
  std::vector<std::thread> noise;
  for (int i = 0; i < 20; ++i)
    noise.emplace_back([&, i] { client_query(crowded.address(), person(500 + i)); });
  const auto b = client_query(crowded.address(), client).response;
  for (auto& t : noise) t.join();
  CHECK(a.contact == b.contact);
  CHECK(a.matched_count == b.matched_count);
}

TEST_CASE("the wait trigger dispatches a partial batch") {
  Running r(person(1), 1000, 30);
  const auto start = std::chrono::steady_clock::now();
  client_query(r.address(), person(2));
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
}

TEST_CASE("no plaintext client key appears in logs or the untrusted queue") {
  auto corpus = person(1);
  Running r(corpus, 4, 2000);
  std::vector<std::vector<TrajectoryPoint>> clients;
  std::set<std::string> keys;
  for (int i = 0; i < 3; ++i) {
    clients.push_back(person(40 + i));
    for (const auto& k : encode_trajectory(clients.back(), service_theta())) keys.insert(k);
  }
  std::vector<std::thread> threads;
  for (auto& c : clients) threads.emplace_back([&] { client_query(r.address(), c); });
  while (r.server->queue().size() < 3) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  const auto dump = r.server->queue().dump();
  CHECK(dump.size() == 3);
  threads.emplace_back([&] { client_query(r.address(), person(99)); });  // fills the batch
  for (auto& t : threads) t.join();
  r.server->stop();
  std::lock_guard lock(r.logs.mu);
  CHECK(!r.logs.lines.empty());
  for (const auto& k : keys) {
    const std::string hex_key = to_hex(k);
    const std::string geohash = k.substr(0, 8);
    for (const auto& line : r.logs.lines) {
      CHECK(line.find(k) == std::string::npos);
      CHECK(line.find(geohash) == std::string::npos);
    }
    for (const auto& entry : dump) {
      CHECK(entry.find(hex_key) == std::string::npos);
      CHECK(entry.find(k) == std::string::npos);
    }
  }
}

TEST_CASE("manifest reload swaps the corpus between batches") {
  auto before = person(1);
  auto after = person(2);
  Running r(before, 1);
  const auto gen = r.enclave->generation();
  CHECK(client_query(r.address(), before).response.contact);
  CHECK_FALSE(client_query(r.address(), after).response.contact);
  build_corpus(r.dir.path(), after);
  Socket admin = connect_unix(r.dir.sub("admin.sock"), 5000);
  const std::string cmd = "reload\n";
  write_all(admin.fd(), std::span(reinterpret_cast<const std::uint8_t*>(cmd.data()), cmd.size()));
  char buf[64] = {};
  CHECK(::recv(admin.fd(), buf, sizeof buf - 1, 0) > 0);
  CHECK(std::string(buf).rfind("ok", 0) == 0);
  for (int i = 0; i < 100 && r.enclave->generation() == gen; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(r.enclave->generation() == gen + 1);
  CHECK(client_query(r.address(), after).response.contact);
  CHECK(r.server->stats().reloads == 1);
}

TEST_CASE("the client refuses a mismatched theta, a foreign attestation key and a foreign build") {
  Running r(person(1), 1);
  Theta other = service_theta();
  other.segment_seconds = 60;
  CHECK(code_of([&] { client_query(r.address(), person(2), {.expected_theta = other}); }) == ErrorCode::kConfig);
  std::array<std::uint8_t, 32> seed{};
  seed.fill(4);
  ClientOptions foreign;
  foreign.attestation_public_key = AttestationKey::from_seed(seed).public_key();
  CHECK(code_of([&] { client_query(r.address(), person(2), foreign); }) == ErrorCode::kHandshake);
  ClientOptions pinned;
  pinned.expected_measurement = measure("some other build", AttestationKey::stub().public_key());
  CHECK(code_of([&] { client_query(r.address(), person(2), pinned); }) == ErrorCode::kHandshake);
  pinned.expected_measurement = r.enclave->measurement();
  CHECK_NOTHROW(client_query(r.address(), person(2), pinned));
}

TEST_CASE("a corpus chunk larger than the budget is refused at startup") {
  TempDir dir;
  build_corpus(dir.path(), person(1), 1000);
  EnclaveConfig ec;
  ec.region.budget_bytes = 64;
  CHECK(code_of([&] { Enclave e(dir.path(), ec); }) == ErrorCode::kBudgetExceeded);
}

TEST_CASE("request queue honours count and wait triggers in FIFO order") {
  RequestQueue q;
  using std::chrono::milliseconds;
  CHECK(q.take_batch(2, milliseconds(10), milliseconds(10)).empty());
  for (std::uint8_t i = 0; i < 5; ++i) q.push(Bytes{i});
  auto b = q.take_batch(2, milliseconds(1000), milliseconds(10));
  REQUIRE(b.size() == 2);
  CHECK(b[0].frame == Bytes{0});
  CHECK(b[1].frame == Bytes{1});
  b = q.take_batch(10, milliseconds(20), milliseconds(10));
  CHECK(b.size() == 3);
  CHECK(b[2].frame == Bytes{4});
  CHECK(q.size() == 0);
  q.close();
  CHECK_THROWS_AS(q.push(Bytes{9}), Error);
}

TEST_CASE("wire encodings round-trip") {
  const Theta t = service_theta();
  CHECK(decode_theta(encode_theta(t)) == t);
  const std::vector<std::string> keys = {"u4pruydq001", "u4pruydq002"};
  CHECK(decode_query(encode_query(keys, 11)) == keys);
  CHECK(code_of([] { decode_query(Bytes{1, 0, 0, 0, 5, 0, 'a'}); }) == ErrorCode::kProtocol);
  ContactResponse c{.client_id = 77, .status = ResponseStatus::kRejected, .contact = false, .matched_count = 0,
                    .timestamp = -5, .attestation_tag = {1, 2, 3}};
  const auto d = decode_response(encode_response(c));
  CHECK(d.client_id == 77);
  CHECK(d.status == ResponseStatus::kRejected);
  CHECK(d.timestamp == -5);
  CHECK(d.attestation_tag == c.attestation_tag);
  CHECK(code_of([] { parse_host_port("nohost"); }) == ErrorCode::kConfig);
  CHECK(parse_host_port("[::1]:80").host == "::1");
}
