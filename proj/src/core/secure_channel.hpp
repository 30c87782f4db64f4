// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>

#include "bytes.hpp"

namespace pct {

using SessionId = std::array<std::uint8_t, 16>;
using PublicKey = std::array<std::uint8_t, 32>;

// Calls sodium_init once; every entry point below does this itself.
void crypto_init();

Bytes sha256(std::span<const std::uint8_t> data);

// Stand-in for an enclave measurement: code_hash digests the build identity
// and the configuration, signer_id digests the attestation public key.
struct Measurement {
  static constexpr std::size_t kBytes = 66;

  std::array<std::uint8_t, 32> code_hash{};
  std::array<std::uint8_t, 32> signer_id{};
  std::uint16_t version = 1;

  Bytes serialize() const;
  static Measurement parse(std::span<const std::uint8_t> bytes);
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

// Identifies this build of the trusted code.
std::string_view build_identity();

// Ed25519 signing key standing in for the platform attestation key. The stub
// key is derived from a fixed seed so its public half can ship with clients.
class AttestationKey {
 public:
  static constexpr std::size_t kSignatureBytes = 64;

  static const AttestationKey& stub();
  static AttestationKey from_seed(std::span<const std::uint8_t, 32> seed);

  const PublicKey& public_key() const { return pk_; }
  Bytes sign(std::span<const std::uint8_t> message) const;

 private:
  PublicKey pk_{};
  std::array<std::uint8_t, 64> sk_{};
};

bool verify_signature(const PublicKey& pk, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature);

Measurement measure(std::string_view config_digest_input, const PublicKey& attestation_pk);

// Which side sealed a frame; part of every nonce so the two directions never
// share one.
enum class Direction : std::uint32_t { kClientToServer = 1, kServerToClient = 2 };

// One authenticated-encryption session. Frames are
//   session_id(16) | counter u64 | ciphertext length u32 | ciphertext | tag(16)
// sealed with ChaCha20-Poly1305 (IETF) under nonce = direction u32 | counter
// u64 with the 28-byte header as associated data. open() accepts only
// counters above the last one it accepted.
class Session {
 public:
  static constexpr std::size_t kHeaderBytes = 28;
  static constexpr std::size_t kTagBytes = 16;
  static constexpr std::size_t kOverhead = kHeaderBytes + kTagBytes;

  Session(const SessionId& id, std::span<const std::uint8_t, 32> key, Direction send_direction,
          std::int64_t established_at, std::int64_t ttl_seconds,
          std::uint64_t counter_limit = UINT64_MAX);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const SessionId& id() const { return id_; }
  std::int64_t established_at() const { return established_at_; }
  bool expired(std::int64_t now) const { return now - established_at_ >= ttl_seconds_; }

  // Throws kSessionExpired once the send counter reaches counter_limit.
  Bytes seal(std::span<const std::uint8_t> plaintext);
  // Throws kSealed on any authentication, framing or replay failure.
  Bytes open(std::span<const std::uint8_t> frame);

 private:
  SessionId id_;
  std::array<std::uint8_t, 32> key_{};
  Direction send_;
  Direction recv_;
  std::int64_t established_at_;
  std::int64_t ttl_seconds_;
  std::uint64_t counter_limit_;
  std::mutex mu_;
  std::uint64_t next_send_ = 0;
  std::optional<std::uint64_t> last_recv_;
};

// Session id of a frame without opening it; kSealed if too short.
SessionId frame_session_id(std::span<const std::uint8_t> frame);

// The server's reply to a client hello. `context` carries service parameters
// (the encoding theta) and is covered by the signature.
struct HandshakeResponse {
  Measurement measurement;
  PublicKey server_public{};
  SessionId session_id{};
  Bytes context;
  Bytes signature;

  Bytes serialize() const;
  static HandshakeResponse parse(std::span<const std::uint8_t> bytes);
};

// The bytes the attestation key signs during a handshake.
Bytes handshake_transcript(const Measurement& m, const PublicKey& client_public, const PublicKey& server_public,
                           const SessionId& session_id, std::span<const std::uint8_t> context);

struct ServerHandshakeResult {
  HandshakeResponse response;
  std::shared_ptr<Session> session;
};

// Server side of the handshake: fresh ephemeral key, fresh session id.
ServerHandshakeResult server_handshake(const PublicKey& client_public, const Measurement& measurement,
                                       const AttestationKey& key, std::span<const std::uint8_t> context,
                                       std::int64_t now, std::int64_t ttl_seconds);

// Client side: holds the ephemeral secret until the response arrives.
class ClientHandshake {
 public:
  ClientHandshake();
  ~ClientHandshake();
  ClientHandshake(const ClientHandshake&) = delete;
  ClientHandshake& operator=(const ClientHandshake&) = delete;

  const PublicKey& public_key() const { return pk_; }

  // Verifies the transcript signature against `attestation_pk` and, when
  // given, the expected measurement; throws kHandshake on any mismatch.
  std::shared_ptr<Session> finish(const HandshakeResponse& response, const PublicKey& attestation_pk,
                                  const std::optional<Measurement>& expected, std::int64_t now,
                                  std::int64_t ttl_seconds);

 private:
  PublicKey pk_{};
  std::array<std::uint8_t, 32> sk_{};
};

// Server-side table of live sessions.
class SessionTable {
 public:
  void add(std::shared_ptr<Session> session);
  std::shared_ptr<Session> find(const SessionId& id) const;
  void erase(const SessionId& id);
  std::size_t purge_expired(std::int64_t now);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<SessionId, std::shared_ptr<Session>> sessions_;
};

std::int64_t unix_now();

}  // namespace pct
