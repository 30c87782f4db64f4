// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "psi.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "error.hpp"

namespace pct {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Bytes ManifestChunkStore::read(std::size_t i) const {
  Bytes bytes = read_file(manifest_.chunk_path(i));
  if (bytes.size() != manifest_.chunks[i].bytes) {
    fail(ErrorCode::kIntegrity, "chunk " + manifest_.chunks[i].path + " has " + std::to_string(bytes.size()) +
                                    " bytes, manifest says " + std::to_string(manifest_.chunks[i].bytes));
  }
  return bytes;
}

MemoryChunkStore MemoryChunkStore::build(std::span<const std::string> sorted_keys, std::uint64_t chunk_entries,
                                         Backend backend, std::size_t key_length) {
  if (chunk_entries == 0) fail(ErrorCode::kConfig, "chunk_entries must be >= 1");
  MemoryChunkStore store;
  for (std::size_t begin = 0; begin < sorted_keys.size(); begin += chunk_entries) {
    const std::size_t end = std::min<std::size_t>(sorted_keys.size(), begin + chunk_entries);
    const auto slice = sorted_keys.subspan(begin, end - begin);
    auto dict = build_dictionary(backend, slice, key_length);
    ChunkInfo info;
    info.index = store.infos_.size();
    info.path = "mem:" + std::to_string(info.index);
    info.first_key = slice.front();
    info.last_key = slice.back();
    info.key_count = slice.size();
    Bytes bytes = dict->serialize();
    info.bytes = bytes.size();
    store.add(std::move(info), std::move(bytes));
  }
  return store;
}

void MemoryChunkStore::add(ChunkInfo info, Bytes bytes) {
  infos_.push_back(std::move(info));
  chunks_.push_back(std::move(bytes));
}

std::uint64_t MemoryChunkStore::total_bytes() const {
  std::uint64_t n = 0;
  for (const auto& i : infos_) n += i.bytes;
  return n;
}

std::uint64_t MemoryChunkStore::max_chunk_bytes() const {
  std::uint64_t n = 0;
  for (const auto& i : infos_) n = std::max(n, i.bytes);
  return n;
}

std::uint64_t payload_bytes(const QueryBatch& batch) {
  std::uint64_t n = 0;
  for (const auto& c : batch)
    for (const auto& k : c.keys) n += k.size();
  return n;
}

UniqueQuerySet map_to_unique_array(const QueryBatch& batch, const Theta& theta, TrustedRegion* region) {
  UniqueQuerySet q;
  q.key_length = theta.key_length();
  q.excluded.assign(batch.size(), 0);
  std::size_t total = 0;
  for (std::size_t slot = 0; slot < batch.size(); ++slot) {
    for (const auto& k : batch[slot].keys) {
      if (!key_well_formed(k, theta)) {
        q.excluded[slot] = 1;
        break;
      }
    }
    if (!q.excluded[slot]) total += batch[slot].keys.size();
  }
  std::vector<std::pair<std::string_view, std::uint32_t>> pairs;
  pairs.reserve(total);
  for (std::size_t slot = 0; slot < batch.size(); ++slot) {
    if (q.excluded[slot]) continue;
    for (const auto& k : batch[slot].keys) pairs.emplace_back(k, static_cast<std::uint32_t>(slot));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::size_t unique = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (i == 0 || pairs[i].first != pairs[i - 1].first) ++unique;
  if (region) q.lease = RegionLease(*region, unique * q.key_length, "query set Q");

  q.keys.reserve(unique);
  q.client_offsets.reserve(unique + 1);
  q.client_slots.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || pairs[i].first != pairs[i - 1].first) {
      if (i > 0) q.client_offsets.push_back(static_cast<std::uint32_t>(q.client_slots.size()));
      q.keys.emplace_back(pairs[i].first);
    }
    q.client_slots.push_back(pairs[i].second);
  }
  if (!pairs.empty()) q.client_offsets.push_back(static_cast<std::uint32_t>(q.client_slots.size()));
  return q;
}

std::vector<std::string> PsiResults::matched_keys(const UniqueQuerySet& q) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < in_results.size(); ++i)
    if (in_results[i]) out.push_back(q.keys[i]);
  return out;
}

PsiResults run_psi(const ChunkStore& chunks, const UniqueQuerySet& q, TrustedRegion* region,
                   const PsiOptions& options) {
  PsiResults r;
  r.key_length = q.key_length;
  r.in_results.assign(q.size(), 0);
  if (region) r.lease = RegionLease(*region, 0, "Results");
  std::vector<std::uint8_t> hits;
  for (std::size_t c = 0; c < chunks.chunk_count(); ++c) {
    const ChunkInfo& info = chunks.info(c);
    std::size_t begin = 0, end = q.size();
    if (options.range_pruning) {
      begin = static_cast<std::size_t>(std::lower_bound(q.keys.begin(), q.keys.end(), info.first_key) - q.keys.begin());
      end = static_cast<std::size_t>(std::upper_bound(q.keys.begin(), q.keys.end(), info.last_key) - q.keys.begin());
      if (begin >= end) continue;
    }
    RegionLease chunk_lease;
    if (region) {
      try {
        chunk_lease = RegionLease(*region, info.bytes, "chunk " + info.path);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBudgetExceeded) throw;
        fail(ErrorCode::kBudgetExceeded, std::string(e.what()) + " (chunk " + std::to_string(c) +
                                             " too large for the trusted budget; lower chunk_entries)");
      }
    }
    const auto dict = load_dictionary(chunks.read(c));
    ++r.chunks_loaded;
    const std::span<const std::string> probe(q.keys.data() + begin, end - begin);
    dict->contains_sorted(probe, hits);
    r.probe_count += probe.size();
    for (std::size_t i = 0; i < probe.size(); ++i) {
      if (hits[i] && !r.in_results[begin + i]) {
        r.in_results[begin + i] = 1;
        ++r.matched;
        if (region) r.lease.grow(q.key_length);
      }
    }
  }
  return r;
}

std::vector<ContactResponse> construct_responses(const QueryBatch& batch, const UniqueQuerySet& q,
                                                 const PsiResults& results, std::int64_t timestamp,
                                                 const ResponseSigner& sign) {
  std::vector<ContactResponse> out(batch.size());
  for (std::size_t slot = 0; slot < batch.size(); ++slot) {
    out[slot].client_id = batch[slot].client_id;
    out[slot].timestamp = timestamp;
    out[slot].status = q.excluded[slot] ? ResponseStatus::kRejected : ResponseStatus::kOk;
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!results.in_results[k]) continue;
    for (const auto slot : q.slots_of(k)) {
      out[slot].contact = true;
      ++out[slot].matched_count;
    }
  }
  if (sign) {
    for (auto& r : out) r.attestation_tag = sign(r);
  }
  return out;
}

std::string BatchReport::csv_header() {
  return "n_c,n_q,n_d,probe_count,peak_trusted_bytes,assemble_ms,psi_ms,respond_ms,paging_penalty_ms";
}

std::string BatchReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu,%llu,%llu,%llu,%llu,%.3f,%.3f,%.3f,%.3f",
                static_cast<unsigned long long>(clients), static_cast<unsigned long long>(unique_keys),
                static_cast<unsigned long long>(chunks), static_cast<unsigned long long>(probe_count),
                static_cast<unsigned long long>(peak_trusted_bytes), assemble_ms, psi_ms, respond_ms,
                paging_penalty_ms);
  return buf;
}

BatchOutcome run_batch(const QueryBatch& batch, const Theta& theta, const ChunkStore& chunks, TrustedRegion& region,
                       std::int64_t timestamp, const PsiOptions& options, const ResponseSigner& sign) {
  BatchOutcome out;
  region.reset_peak();
  const std::uint64_t baseline = region.used_bytes();

  auto t0 = Clock::now();
  RegionLease payloads(region, payload_bytes(batch), "client payloads");
  UniqueQuerySet q = map_to_unique_array(batch, theta, &region);
  out.report.assemble_ms = ms_since(t0);

  t0 = Clock::now();
  PsiResults results = run_psi(chunks, q, &region, options);
  out.report.psi_ms = ms_since(t0);

  t0 = Clock::now();
  out.responses = construct_responses(batch, q, results, timestamp, sign);
  results.lease.reset();
  q.lease.reset();
  payloads.reset();
  out.report.respond_ms = ms_since(t0);

  out.report.clients = batch.size();
  out.report.unique_keys = q.size();
  out.report.chunks = chunks.chunk_count();
  out.report.probe_count = results.probe_count;
  out.report.peak_trusted_bytes = region.peak_bytes() - baseline;
  out.report.paging_penalty_ms = region.paging_penalty_ms();
  return out;
}

}  // namespace pct
