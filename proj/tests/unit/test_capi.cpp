// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pct/pct.h"
#include "temp_dir.hpp"

namespace {

pct_theta small_theta() { return pct_theta{6, 1000, 1000 + 3600 * 24, 3600, 2}; }

std::string padded(long long v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(width) - s.size(), '0') + s;
}

void write_csv(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("status names and errors are reported through the C surface") {
  CHECK(std::string(pct_status_name(PCT_OK)) == "ok");
  CHECK(std::string(pct_status_name(PCT_ERR_BUDGET_EXCEEDED)) == "budget-exceeded");
  CHECK(std::string(pct_version()) == "1.0.0");

  pct_dict* d = nullptr;
  CHECK(pct_dict_build(PCT_BACKEND_FSA, nullptr, 0, 8, nullptr) == PCT_ERR_INVALID_INPUT);
  CHECK(std::string(pct_last_error()).size() > 0);

  const std::uint8_t garbage[] = {'P', 'C', 'T', 'X', 0, 0, 0, 0};
  CHECK(pct_dict_load(garbage, sizeof garbage, &d) == PCT_ERR_FORMAT);
  CHECK(d == nullptr);
  CHECK(pct_bench("latency", nullptr, "/nonexistent/out.csv") == PCT_ERR_CONFIG);
}

TEST_CASE("encode_point matches the geohash oracle") {
  const pct_theta th = small_theta();
  char key[64];
  REQUIRE(pct_encode_point(&th, 1000 + 3600 * 5 + 7, 34.70, 135.50, key, sizeof key) == PCT_OK);
  CHECK(std::string(key) == oracle::geohash(34.70, 135.50, 6) + padded(5, 2));

  char tiny[4];
  CHECK(pct_encode_point(&th, 1000, 34.7, 135.5, tiny, sizeof tiny) == PCT_ERR_INVALID_INPUT);
  CHECK(pct_encode_point(&th, 999, 34.7, 135.5, key, sizeof key) == PCT_ERR_OUT_OF_PERIOD);
  pct_theta bad = th;
  bad.geo_digits = 0;
  CHECK(pct_encode_point(&bad, 1000, 34.7, 135.5, key, sizeof key) == PCT_ERR_CONFIG);
}

TEST_CASE("dictionaries round trip through serialize and load for both backends") {
  const std::string packed = "aaaabbbbbcdecccc";
  for (const pct_backend b : {PCT_BACKEND_FSA, PCT_BACKEND_HASH}) {
    pct_dict* d = nullptr;
    REQUIRE(pct_dict_build(b, packed.data(), 4, 4, &d) == PCT_OK);
    CHECK(pct_dict_key_count(d) == 4);
    CHECK(pct_dict_contains(d, "bcde", 4) == 1);
    CHECK(pct_dict_contains(d, "bcdf", 4) == 0);
    CHECK(pct_dict_contains(d, "bcd", 3) == 0);

    std::size_t size = 0;
    REQUIRE(pct_dict_serialize(d, nullptr, 0, &size) == PCT_OK);
    CHECK(size == pct_dict_serialized_bytes(d));
    std::vector<std::uint8_t> buf(size);
    REQUIRE(pct_dict_serialize(d, buf.data(), buf.size(), &size) == PCT_OK);

    pct_dict* e = nullptr;
    REQUIRE(pct_dict_load(buf.data(), buf.size(), &e) == PCT_OK);
    for (int i = 0; i < 4; ++i) CHECK(pct_dict_contains(e, packed.data() + 4 * i, 4) == 1);
    buf[buf.size() / 2] ^= 0x10;
    pct_dict* f = nullptr;
    CHECK(pct_dict_load(buf.data(), buf.size(), &f) != PCT_OK);
    CHECK(f == nullptr);
    pct_dict_free(e);
    pct_dict_free(d);
  }
  pct_dict* d = nullptr;
  CHECK(pct_dict_build(PCT_BACKEND_FSA, "bbbbaaaa", 2, 4, &d) != PCT_OK);
}

TEST_CASE("ingest, serve and query end to end") {
  testing::TempDir tmp;
  const pct_theta th = small_theta();
  write_csv(tmp.sub("corpus.csv"), {"1000,34.70,135.50", "8200,34.71,135.51", "99999999,34.7,135.5"});
  write_csv(tmp.sub("hit.csv"), {"1010,34.70,135.50", "50000,10,10"});
  write_csv(tmp.sub("miss.csv"), {"4700,34.70,135.50"});

  pct_ingest_options io{};
  const std::string csv = tmp.sub("corpus.csv"), out = tmp.sub("corpus");
  io.input_csv = csv.c_str();
  io.out_dir = out.c_str();
  io.theta = th;
  io.chunk_entries = 1;
  io.backend = PCT_BACKEND_FSA;
  pct_ingest_stats st{};
  REQUIRE(pct_ingest(&io, &st) == PCT_OK);
  CHECK(st.points == 3);
  CHECK(st.dropped_out_of_period == 1);
  CHECK(st.unique_keys == 2);
  CHECK(st.chunks == 2);
  CHECK(st.generation == 1);

  pct_server_options so;
  pct_server_options_init(&so);
  so.manifest_dir = out.c_str();
  so.listen = "127.0.0.1:0";
  so.batch_count = 1;
  so.batch_wait_ms = 50;
  so.quiet = 1;
  pct_server* server = nullptr;
  REQUIRE(pct_server_start(&so, &server) == PCT_OK);
  const std::string addr = "127.0.0.1:" + std::to_string(pct_server_port(server));

  pct_query_result r{};
  REQUIRE(pct_query(addr.c_str(), tmp.sub("hit.csv").c_str(), 10000, &r) == PCT_OK);
  CHECK(r.contact == 1);
  CHECK(r.matched_count == 1);
  CHECK(r.keys_sent == 2);
  CHECK(r.theta.geo_digits == 6);
  REQUIRE(pct_query(addr.c_str(), tmp.sub("miss.csv").c_str(), 10000, &r) == PCT_OK);
  CHECK(r.contact == 0);
  CHECK(pct_query(addr.c_str(), tmp.sub("absent.csv").c_str(), 10000, &r) == PCT_ERR_IO);

  // Expire the first segment; the hit trajectory no longer matches after reload.
  pct_ingest_options up = io;
  up.input_csv = nullptr;
  REQUIRE(pct_update(&up, 1000 + 3600, &st) == PCT_OK);
  CHECK(st.generation == 2);
  CHECK(st.chunks == 1);
  pct_server_reload(server);
  REQUIRE(pct_query(addr.c_str(), tmp.sub("hit.csv").c_str(), 10000, &r) == PCT_OK);
  CHECK(r.contact == 0);

  pct_server_stop(server);
  pct_server_free(server);
  CHECK(pct_query(addr.c_str(), tmp.sub("hit.csv").c_str(), 2000, &r) == PCT_ERR_TRANSPORT);
}

TEST_CASE("server start reports a missing manifest as an I/O error") {
  pct_server_options so;
  pct_server_options_init(&so);
  so.manifest_dir = "/nonexistent/pct-corpus";
  so.quiet = 1;
  pct_server* server = nullptr;
  CHECK(pct_server_start(&so, &server) == PCT_ERR_IO);
  CHECK(server == nullptr);
}
