// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "enclave.hpp"

#include <sodium.h>

#include "protocol.hpp"

namespace pct {

Enclave::Enclave(std::string manifest_dir, EnclaveConfig config, const AttestationKey& key)
    : dir_(std::move(manifest_dir)), config_(config), key_(key), region_(config.region) {
  if (config_.session_ttl_seconds <= 0) fail(ErrorCode::kConfig, "session TTL must be positive");
  corpus_ = load_corpus();
}

std::shared_ptr<const Enclave::Corpus> Enclave::load_corpus() const {
  auto manifest = ChunkManifest::load(dir_);
  if (manifest.max_chunk_bytes() > config_.region.budget_bytes && config_.region.paging_mode == PagingMode::kStrict) {
    fail(ErrorCode::kBudgetExceeded, "largest chunk (" + std::to_string(manifest.max_chunk_bytes()) +
                                         " bytes) exceeds the trusted budget; rebuild with fewer chunk entries");
  }
  auto c = std::make_shared<Corpus>();
  c->theta = manifest.theta;
  c->context = encode_theta(manifest.theta);
  std::string config_text(c->context.begin(), c->context.end());
  config_text += "|budget=" + std::to_string(config_.region.budget_bytes);
  config_text += "|paging=" + std::string(paging_mode_name(config_.region.paging_mode));
  c->measurement = measure(config_text, key_.public_key());
  c->store = std::make_shared<ManifestChunkStore>(std::move(manifest));
  return c;
}

std::shared_ptr<const Enclave::Corpus> Enclave::corpus() const {
  std::lock_guard lock(mu_);
  return corpus_;
}

Measurement Enclave::measurement() const { return corpus()->measurement; }
Theta Enclave::theta() const { return corpus()->theta; }
std::uint64_t Enclave::generation() const { return corpus()->store->manifest().generation; }
std::uint64_t Enclave::corpus_key_count() const { return corpus()->store->manifest().corpus_key_count; }

void Enclave::reload() {
  auto fresh = load_corpus();
  std::lock_guard lock(mu_);
  corpus_ = std::move(fresh);
}

Bytes Enclave::handshake(std::span<const std::uint8_t> client_hello) {
  if (client_hello.size() != 32) fail(ErrorCode::kProtocol, "handshake body must be a 32-byte public key");
  PublicKey client_public;
  std::copy(client_hello.begin(), client_hello.end(), client_public.begin());
  const auto c = corpus();
  auto result =
      server_handshake(client_public, c->measurement, key_, c->context, unix_now(), config_.session_ttl_seconds);
  sessions_.add(result.session);
  return result.response.serialize();
}

bool Enclave::has_session(std::span<const std::uint8_t> frame) const {
  if (frame.size() < Session::kOverhead) return false;
  const auto s = sessions_.find(frame_session_id(frame));
  return s && !s->expired(unix_now());
}

std::size_t Enclave::purge_sessions() { return sessions_.purge_expired(unix_now()); }

std::vector<Enclave::SlotResult> Enclave::process_batch(const std::vector<Bytes>& frames, BatchReport* report) {
  std::lock_guard batch_lock(batch_mu_);
  const auto c = corpus();
  const std::int64_t now = unix_now();
  std::vector<SlotResult> out(frames.size());
  std::vector<std::shared_ptr<Session>> sessions(frames.size());
  std::vector<std::size_t> slot_of;  // batch index -> frame index
  QueryBatch batch;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      auto s = sessions_.find(frame_session_id(frames[i]));
      if (!s) fail(ErrorCode::kProtocol, "query before handshake");
      if (s->expired(now)) {
        sessions_.erase(s->id());
        fail(ErrorCode::kSessionExpired, "session expired; handshake again");
      }
      Bytes plain = s->open(frames[i]);
      ClientQuery q;
      q.client_id = client_id_of(s->id());
      q.keys = decode_query(plain);
      sodium_memzero(plain.data(), plain.size());
      sessions[i] = std::move(s);
      slot_of.push_back(i);
      batch.push_back(std::move(q));
    } catch (const Error& e) {
      out[i].error = e.code();
      out[i].message = e.what();
    }
  }

  BatchOutcome outcome;
  try {
    outcome = run_batch(batch, c->theta, *c->store, region_, now, config_.psi,
                        [&](const ContactResponse& r) { return key_.sign(response_signing_message(r)); });
  } catch (const Error& e) {
    for (const auto i : slot_of) {
      out[i].error = e.code();
      out[i].message = e.what();
    }
    return out;
  }
  for (auto& q : batch)
    for (auto& k : q.keys) sodium_memzero(k.data(), k.size());
  if (report) *report = outcome.report;

  for (std::size_t b = 0; b < slot_of.size(); ++b) {
    const std::size_t i = slot_of[b];
    try {
      out[i].frame = sessions[i]->seal(encode_response(outcome.responses[b]));
      out[i].ok = true;
    } catch (const Error& e) {
      out[i].error = e.code();
      out[i].message = e.what();
    }
  }
  return out;
}

}  // namespace pct
