// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "psi.hpp"
#include "secure_channel.hpp"
#include "trusted_region.hpp"

namespace pct {

struct EnclaveConfig {
  RegionConfig region;
  std::int64_t session_ttl_seconds = 600;
  PsiOptions psi;
};

// Everything on the trusted side of the boundary: session keys, the
// attestation key, the corpus and the accounted memory region. Query
// plaintext exists only inside process_batch().
class Enclave {
 public:
  Enclave(std::string manifest_dir, EnclaveConfig config, const AttestationKey& key = AttestationKey::stub());

  Measurement measurement() const;
  Theta theta() const;
  std::uint64_t generation() const;
  std::uint64_t corpus_key_count() const;
  const PublicKey& attestation_public_key() const { return key_.public_key(); }

  // Answers a HANDSHAKE body with a HANDSHAKE_RESP body.
  Bytes handshake(std::span<const std::uint8_t> client_hello);
  bool has_session(std::span<const std::uint8_t> frame) const;

  struct SlotResult {
    bool ok = false;
    Bytes frame;  // sealed response when ok
    ErrorCode error = ErrorCode::kProtocol;
    std::string message;
  };

  // Opens every query frame, runs one PSI batch over the valid ones and
  // seals one response per frame, in order.
  std::vector<SlotResult> process_batch(const std::vector<Bytes>& frames, BatchReport* report = nullptr);

  // Re-reads the manifest directory; callers run it between batches.
  void reload();

  std::size_t purge_sessions();
  std::size_t session_count() const { return sessions_.size(); }

 private:
  struct Corpus {
    std::shared_ptr<const ManifestChunkStore> store;
    Theta theta;
    Measurement measurement;
    Bytes context;
  };

  std::shared_ptr<const Corpus> load_corpus() const;
  std::shared_ptr<const Corpus> corpus() const;

  std::string dir_;
  EnclaveConfig config_;
  const AttestationKey& key_;
  TrustedRegion region_;
  SessionTable sessions_;
  mutable std::mutex mu_;
  std::shared_ptr<const Corpus> corpus_;
  std::mutex batch_mu_;
};

}  // namespace pct
