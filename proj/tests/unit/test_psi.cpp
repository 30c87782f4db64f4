// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "error.hpp"
#include "generator.hpp"
#include "psi.hpp"

using namespace pct;

namespace {

Theta tiny_theta() {
  Theta t;
  t.geo_digits = 3;
  t.period_start = 0;
  t.period_end = 100;
  t.segment_seconds = 10;
  t.time_width = 2;
  return t;
}

std::string random_key(std::mt19937_64& rng, const Theta& theta) {
  static constexpr std::string_view kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  std::string k;
  // A small alphabet slice keeps collisions between clients and the corpus common.
  for (int i = 0; i < theta.geo_digits; ++i) k += kAlphabet[rng() % 3];
  k += periodical_encode(theta.period_start + static_cast<std::int64_t>(rng() % theta.segment_count()) *
                                                  theta.segment_seconds,
                         theta);
  return k;
}

struct Expected {
  bool contact = false;
  std::uint32_t matched = 0;
};

// Brute force: per client, count distinct keys present in the corpus.
std::vector<Expected> brute_force(const QueryBatch& batch, const std::set<std::string>& corpus) {
  std::vector<Expected> out;
  for (const auto& c : batch) {
    std::set<std::string> distinct(c.keys.begin(), c.keys.end());
    Expected e;
    for (const auto& k : distinct)
      if (corpus.count(k)) ++e.matched;
    e.contact = e.matched > 0;
    out.push_back(e);
  }
  return out;
}

std::vector<ContactResponse> run(const QueryBatch& batch, const std::vector<std::string>& corpus, std::uint64_t entries,
                                 Backend backend, PsiOptions options = {}, PsiResults* keep = nullptr) {
  const Theta theta = tiny_theta();
  const auto store = MemoryChunkStore::build(corpus, entries, backend, theta.key_length());
  auto q = map_to_unique_array(batch, theta);
  auto r = run_psi(store, q, nullptr, options);
  auto out = construct_responses(batch, q, r, 42);
  if (keep) *keep = std::move(r);
  return out;
}

}  // namespace

TEST_CASE("two clients sharing a key produce a sorted unique Q with a reverse index") {
  const Theta theta = tiny_theta();
  QueryBatch batch = {{1, {"bcd05", "bcd01", "bcd05"}}, {2, {"bcd03", "bcd01"}}};
  const auto q = map_to_unique_array(batch, theta);
  CHECK(q.keys == std::vector<std::string>{"bcd01", "bcd03", "bcd05"});
  CHECK(std::vector<std::uint32_t>(q.slots_of(0).begin(), q.slots_of(0).end()) == std::vector<std::uint32_t>{0, 1});
  CHECK(std::vector<std::uint32_t>(q.slots_of(1).begin(), q.slots_of(1).end()) == std::vector<std::uint32_t>{1});
  CHECK(std::vector<std::uint32_t>(q.slots_of(2).begin(), q.slots_of(2).end()) == std::vector<std::uint32_t>{0});
  CHECK(q.key_bytes() == 15);

  const std::vector<std::string> corpus = {"bcd03", "zzz00"};
  PsiResults r;
  const auto resp = run(batch, corpus, 1, Backend::kFsa, {}, &r);
  CHECK(r.matched_keys(q) == std::vector<std::string>{"bcd03"});
  CHECK_FALSE(resp[0].contact);
  CHECK(resp[1].contact);
  CHECK(resp[1].matched_count == 1);
  CHECK(resp[0].client_id == 1);
  CHECK(resp[1].timestamp == 42);
}

TEST_CASE("empty batch and empty corpus") {
  const Theta theta = tiny_theta();
  const auto q = map_to_unique_array({}, theta);
  CHECK(q.size() == 0);
  const auto store = MemoryChunkStore::build({}, 10, Backend::kFsa, theta.key_length());
  CHECK(store.chunk_count() == 0);
  const auto r = run_psi(store, q, nullptr);
  CHECK(r.matched == 0);
  CHECK(r.probe_count == 0);
  QueryBatch batch = {{7, {"bcd01"}}};
  const auto resp = run(batch, {}, 10, Backend::kFsa);
  CHECK_FALSE(resp[0].contact);
}

TEST_CASE("randomized batches agree with brute force for every backend, chunking and pruning") {
  std::mt19937_64 rng(2024);
  const Theta theta = tiny_theta();
  for (int trial = 0; trial < 60; ++trial) {
    std::set<std::string> corpus_set;
    const std::size_t corpus_size = rng() % 200;
    for (std::size_t i = 0; i < corpus_size; ++i) corpus_set.insert(random_key(rng, theta));
    const std::vector<std::string> corpus(corpus_set.begin(), corpus_set.end());
    QueryBatch batch(1 + rng() % 20);
    for (std::size_t c = 0; c < batch.size(); ++c) {
      batch[c].client_id = 1000 + c;
      const std::size_t n = rng() % 30;
      for (std::size_t i = 0; i < n; ++i) batch[c].keys.push_back(random_key(rng, theta));
    }
    const auto expected = brute_force(batch, corpus_set);
    for (auto backend : {Backend::kFsa, Backend::kHash}) {
      for (std::uint64_t entries : {1ull, 3ull, 50ull, 1000ull}) {
        for (bool prune : {false, true}) {
          const auto resp = run(batch, corpus, entries, backend, {.range_pruning = prune});
          REQUIRE(resp.size() == batch.size());
          for (std::size_t c = 0; c < batch.size(); ++c) {
            CHECK(resp[c].contact == expected[c].contact);
            CHECK(resp[c].matched_count == expected[c].matched);
            CHECK(resp[c].client_id == batch[c].client_id);
          }
        }
      }
    }
  }
}

TEST_CASE("disjoint corpus gives no results; a superset corpus matches all of Q") {
  const Theta theta = tiny_theta();
  QueryBatch batch = {{1, {"bbb01", "bbc02"}}, {2, {"bcb03"}}};
  auto q = map_to_unique_array(batch, theta);
  const std::vector<std::string> disjoint = {"ccc01", "ccc02"};
  auto store = MemoryChunkStore::build(disjoint, 1, Backend::kFsa, 5);
  CHECK(run_psi(store, q, nullptr).matched == 0);
  const std::vector<std::string> superset = {"bbb01", "bbc02", "bcb03", "ccc01"};
  store = MemoryChunkStore::build(superset, 2, Backend::kFsa, 5);
  const auto r = run_psi(store, q, nullptr);
  CHECK(r.matched == q.size());
  CHECK(r.matched_keys(q) == q.keys);
}

TEST_CASE("probe count is chunks times unique keys without pruning") {
  std::mt19937_64 rng(5);
  const Theta theta = tiny_theta();
  std::set<std::string> cs;
  while (cs.size() < 100) cs.insert(random_key(rng, theta));
  const std::vector<std::string> corpus(cs.begin(), cs.end());
  QueryBatch batch = {{1, {}}, {2, {}}};
  for (int i = 0; i < 40; ++i) batch[i % 2].keys.push_back(random_key(rng, theta));
  const auto q = map_to_unique_array(batch, theta);
  const auto store = MemoryChunkStore::build(corpus, 7, Backend::kFsa, 5);
  const auto r = run_psi(store, q, nullptr);
  CHECK(store.chunk_count() == 15);
  CHECK(r.chunks_loaded == 15);
  CHECK(r.probe_count == 15 * q.size());
  const auto pruned = run_psi(store, q, nullptr, {.range_pruning = true});
  CHECK(pruned.probe_count <= q.size());
  CHECK(pruned.in_results == r.in_results);
}

TEST_CASE("a client with a malformed key is rejected without affecting others") {
  const Theta theta = tiny_theta();
  QueryBatch batch = {{1, {"bcd01", "bcd1"}}, {2, {"bcd01"}}, {3, {"bcd01", "BCD01"}}, {4, {"bcd0x"}}};
  const auto q = map_to_unique_array(batch, theta);
  CHECK(q.excluded == std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(q.keys == std::vector<std::string>{"bcd01"});
  const auto resp = run(batch, {"bcd01"}, 5, Backend::kFsa);
  CHECK(resp[0].status == ResponseStatus::kRejected);
  CHECK_FALSE(resp[0].contact);
  CHECK(resp[1].status == ResponseStatus::kOk);
  CHECK(resp[1].contact);
  CHECK(resp[3].status == ResponseStatus::kRejected);
}

TEST_CASE("run_batch peak equals payloads plus Q plus the largest chunk-with-results moment") {
  const Theta theta = tiny_theta();
  std::mt19937_64 rng(17);
  std::set<std::string> cs;
  while (cs.size() < 150) cs.insert(random_key(rng, theta));
  const std::vector<std::string> corpus(cs.begin(), cs.end());
  QueryBatch batch(6);
  for (std::size_t c = 0; c < batch.size(); ++c) {
    batch[c].client_id = c;
    for (int i = 0; i < 25; ++i) batch[c].keys.push_back(random_key(rng, theta));
  }
  const auto store = MemoryChunkStore::build(corpus, 20, Backend::kFsa, 5);
  const auto q = map_to_unique_array(batch, theta);
  const std::uint64_t payload = payload_bytes(batch);
  CHECK(payload == 6 * 25 * 5);

  // Hand computation: while chunk i is loaded, Results hold every match found
  // in chunks 0..i.
  std::uint64_t matched_so_far = 0, worst = 0, largest_chunk = 0;
  for (std::size_t i = 0; i < store.chunk_count(); ++i) {
    const auto& info = store.info(i);
    for (const auto& k : q.keys)
      if (k >= info.first_key && k <= info.last_key && cs.count(k)) ++matched_so_far;
    worst = std::max(worst, info.bytes + matched_so_far * 5);
    largest_chunk = std::max(largest_chunk, info.bytes);
  }
  const std::uint64_t expected_peak = payload + q.key_bytes() + worst;

  TrustedRegion region({.budget_bytes = 1 << 20});
  const auto out = run_batch(batch, theta, store, region, 99);
  CHECK(out.report.peak_trusted_bytes == expected_peak);
  CHECK(out.report.peak_trusted_bytes <= payload + q.key_bytes() + largest_chunk + matched_so_far * 5);
  CHECK(out.report.unique_keys == q.size());
  CHECK(out.report.chunks == store.chunk_count());
  CHECK(out.report.probe_count == store.chunk_count() * q.size());
  CHECK(region.used_bytes() == 0);
  CHECK(region.live_count() == 0);
  CHECK(out.responses.size() == batch.size());
}

TEST_CASE("an oversized chunk raises budget-exceeded naming the chunk and releases everything") {
  const Theta theta = tiny_theta();
  std::vector<std::string> corpus;
  for (char a = 'b'; a <= 'h'; ++a)
    for (int s = 0; s < 10; ++s) corpus.push_back(std::string(3, a) + periodical_encode(s * 10, theta));
  const auto store = MemoryChunkStore::build(corpus, 1000, Backend::kHash, 5);
  QueryBatch batch = {{1, {"bbb01"}}};
  TrustedRegion region({.budget_bytes = store.max_chunk_bytes() - 1});
  try {
    run_batch(batch, theta, store, region, 0);
    FAIL("expected budget-exceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudgetExceeded);
    CHECK(std::string(e.what()).find("chunk 0") != std::string::npos);
  }
  CHECK(region.used_bytes() == 0);
}

TEST_CASE("a corrupted chunk aborts the batch with an integrity error") {
  const Theta theta = tiny_theta();
  const std::vector<std::string> corpus = {"bbb01", "bbb02", "ccc03"};
  auto good = MemoryChunkStore::build(corpus, 10, Backend::kFsa, 5);
  Bytes bytes = good.read(0);
  bytes[bytes.size() / 2] ^= 0x40;
  MemoryChunkStore bad;
  bad.add(good.info(0), bytes);
  QueryBatch batch = {{1, {"bbb01"}}};
  auto q = map_to_unique_array(batch, theta);
  try {
    run_psi(bad, q, nullptr);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::kIntegrity || e.code() == ErrorCode::kFormat));
  }
}

TEST_CASE("responses are signed when a signer is supplied") {
  QueryBatch batch = {{5, {"bbb01"}}};
  const Theta theta = tiny_theta();
  const auto q = map_to_unique_array(batch, theta);
  const auto store = MemoryChunkStore::build(std::vector<std::string>{"bbb01"}, 1, Backend::kFsa, 5);
  const auto r = run_psi(store, q, nullptr);
  const auto resp = construct_responses(batch, q, r, 7, [](const ContactResponse& c) {
    return Bytes{static_cast<std::uint8_t>(c.client_id), static_cast<std::uint8_t>(c.contact)};
  });
  CHECK(resp[0].attestation_tag == Bytes{5, 1});
}

TEST_CASE("report csv row has one field per header column") {
  BatchReport r;
  r.clients = 3;
  const auto header = BatchReport::csv_header();
  const auto row = r.csv_row();
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("3,", 0) == 0);
}
