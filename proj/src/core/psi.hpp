// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chunk_builder.hpp"
#include "codec.hpp"
#include "dictionary.hpp"
#include "trusted_region.hpp"

namespace pct {

// Source of the corpus chunks r_1..r_ND, read one at a time.
class ChunkStore {
 public:
  virtual ~ChunkStore() = default;
  virtual std::size_t chunk_count() const = 0;
  virtual const ChunkInfo& info(std::size_t i) const = 0;
  virtual Bytes read(std::size_t i) const = 0;
};

// Reads chunk files named by a manifest; a size mismatch is an integrity error.
class ManifestChunkStore final : public ChunkStore {
 public:
  explicit ManifestChunkStore(ChunkManifest manifest) : manifest_(std::move(manifest)) {}
  std::size_t chunk_count() const override { return manifest_.chunk_count(); }
  const ChunkInfo& info(std::size_t i) const override { return manifest_.chunks[i]; }
  Bytes read(std::size_t i) const override;
  const ChunkManifest& manifest() const { return manifest_; }

 private:
  ChunkManifest manifest_;
};

// Serialized chunks held in memory; used by benchmarks and tests.
class MemoryChunkStore final : public ChunkStore {
 public:
  // Splits sorted unique keys into consecutive chunks of chunk_entries.
  static MemoryChunkStore build(std::span<const std::string> sorted_keys, std::uint64_t chunk_entries,
                                Backend backend, std::size_t key_length);
  void add(ChunkInfo info, Bytes bytes);

  std::size_t chunk_count() const override { return infos_.size(); }
  const ChunkInfo& info(std::size_t i) const override { return infos_[i]; }
  Bytes read(std::size_t i) const override { return chunks_[i]; }
  std::uint64_t total_bytes() const;
  std::uint64_t max_chunk_bytes() const;

 private:
  std::vector<ChunkInfo> infos_;
  std::vector<Bytes> chunks_;
};

struct ClientQuery {
  std::uint64_t client_id = 0;
  std::vector<std::string> keys;  // already encoded client-side
};

using QueryBatch = std::vector<ClientQuery>;

std::uint64_t payload_bytes(const QueryBatch& batch);

// Q: the sorted union of a batch's keys with a reverse index from each key to
// the batch slots that sent it.
struct UniqueQuerySet {
  std::vector<std::string> keys;
  std::vector<std::uint32_t> client_offsets{0};  // size N_Q + 1
  std::vector<std::uint32_t> client_slots;
  std::vector<std::uint8_t> excluded;  // per batch slot: 1 if rejected
  std::size_t key_length = 0;
  RegionLease lease;

  std::size_t size() const { return keys.size(); }
  std::uint64_t key_bytes() const { return keys.size() * key_length; }
  std::span<const std::uint32_t> slots_of(std::size_t k) const {
    return {client_slots.data() + client_offsets[k], client_offsets[k + 1] - client_offsets[k]};
  }
};

// mapToUniqueArray. Clients with a malformed or wrong-length key are marked
// excluded and contribute nothing; Q is charged to `region` when given.
UniqueQuerySet map_to_unique_array(const QueryBatch& batch, const Theta& theta, TrustedRegion* region = nullptr);

struct PsiOptions {
  // Probe only the part of Q inside a chunk's [first_key, last_key].
  bool range_pruning = false;
};

struct PsiResults {
  std::vector<std::uint8_t> in_results;  // per Q entry
  std::uint64_t matched = 0;
  std::uint64_t probe_count = 0;
  std::uint64_t chunks_loaded = 0;
  std::size_t key_length = 0;
  RegionLease lease;

  std::vector<std::string> matched_keys(const UniqueQuerySet& q) const;
};

// The chunk loop: load each chunk into the region, probe Q, release it.
PsiResults run_psi(const ChunkStore& chunks, const UniqueQuerySet& q, TrustedRegion* region,
                   const PsiOptions& options = {});

enum class ResponseStatus : std::uint8_t { kOk = 0, kRejected = 1 };

struct ContactResponse {
  std::uint64_t client_id = 0;
  ResponseStatus status = ResponseStatus::kOk;
  bool contact = false;
  std::uint32_t matched_count = 0;
  std::int64_t timestamp = 0;
  Bytes attestation_tag;
};

using ResponseSigner = std::function<Bytes(const ContactResponse&)>;

// constructResponses: contact iff at least one of the client's keys matched.
std::vector<ContactResponse> construct_responses(const QueryBatch& batch, const UniqueQuerySet& q,
                                                 const PsiResults& results, std::int64_t timestamp,
                                                 const ResponseSigner& sign = {});

struct BatchReport {
  std::uint64_t clients = 0;  // N_C
  std::uint64_t unique_keys = 0;  // N_Q
  std::uint64_t chunks = 0;  // N_D
  std::uint64_t probe_count = 0;
  std::uint64_t peak_trusted_bytes = 0;
  double assemble_ms = 0;
  double psi_ms = 0;
  double respond_ms = 0;
  double paging_penalty_ms = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

struct BatchOutcome {
  std::vector<ContactResponse> responses;
  BatchReport report;
};

// The whole trusted-side pipeline for one batch. The exact client payloads
// stay charged to the region until responses are built.
BatchOutcome run_batch(const QueryBatch& batch, const Theta& theta, const ChunkStore& chunks, TrustedRegion& region,
                       std::int64_t timestamp, const PsiOptions& options = {}, const ResponseSigner& sign = {});

}  // namespace pct
