// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "secure_channel.hpp"

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <cstring>

#include "error.hpp"

namespace pct {

namespace {

constexpr std::string_view kTranscriptLabel = "pct-handshake-v1";
constexpr std::string_view kKeyLabel = "pct-session-key-v1";
constexpr std::string_view kMeasureLabel = "pct-measurement-v1";

// Fixed seed of the stub attestation key.
constexpr std::array<std::uint8_t, 32> kStubSeed = {
    0x70, 0x63, 0x74, 0x2d, 0x61, 0x74, 0x74, 0x65, 0x73, 0x74, 0x61, 0x74, 0x69, 0x6f, 0x6e, 0x2d,
    0x73, 0x74, 0x75, 0x62, 0x2d, 0x6b, 0x65, 0x79, 0x2d, 0x73, 0x65, 0x65, 0x64, 0x2d, 0x30, 0x31};

std::array<std::uint8_t, 12> make_nonce(Direction d, std::uint64_t counter) {
  std::array<std::uint8_t, 12> n{};
  const auto dir = static_cast<std::uint32_t>(d);
  for (int i = 0; i < 4; ++i) n[i] = static_cast<std::uint8_t>(dir >> (8 * i));
  for (int i = 0; i < 8; ++i) n[4 + i] = static_cast<std::uint8_t>(counter >> (8 * i));
  return n;
}

std::array<std::uint8_t, 32> derive_key(std::span<const std::uint8_t, 32> shared, const PublicKey& client_public,
                                        const PublicKey& server_public, const SessionId& session_id) {
  std::array<std::uint8_t, 32> key{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kKeyLabel.data()), kKeyLabel.size());
  crypto_generichash_update(&st, shared.data(), shared.size());
  crypto_generichash_update(&st, client_public.data(), client_public.size());
  crypto_generichash_update(&st, server_public.data(), server_public.size());
  crypto_generichash_update(&st, session_id.data(), session_id.size());
  crypto_generichash_final(&st, key.data(), key.size());
  return key;
}

template <std::size_t N>
void read_array(ByteReader& r, std::array<std::uint8_t, N>& out) {
  const auto s = r.raw(N);
  std::copy(s.begin(), s.end(), out.begin());
}

}  // namespace

void crypto_init() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) fail(ErrorCode::kLogic, "libsodium initialization failed");
}

Bytes sha256(std::span<const std::uint8_t> data) {
  crypto_init();
  Bytes out(crypto_hash_sha256_BYTES);
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Bytes Measurement::serialize() const {
  ByteWriter w(kBytes);
  w.raw(code_hash);
  w.raw(signer_id);
  w.u16(version);
  return w.take();
}

Measurement Measurement::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBytes) fail(ErrorCode::kHandshake, "measurement must be 66 bytes");
  ByteReader r(bytes, ErrorCode::kHandshake);
  Measurement m;
  read_array(r, m.code_hash);
  read_array(r, m.signer_id);
  m.version = r.u16();
  return m;
}

std::string_view build_identity() { return "pct-trusted-core/1.0.0"; }

const AttestationKey& AttestationKey::stub() {
  static const AttestationKey key = from_seed(kStubSeed);
  return key;
}

AttestationKey AttestationKey::from_seed(std::span<const std::uint8_t, 32> seed) {
  crypto_init();
  AttestationKey k;
  crypto_sign_seed_keypair(k.pk_.data(), k.sk_.data(), seed.data());
  return k;
}

Bytes AttestationKey::sign(std::span<const std::uint8_t> message) const {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk_.data());
  return sig;
}

bool verify_signature(const PublicKey& pk, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) {
  crypto_init();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), pk.data()) == 0;
}

Measurement measure(std::string_view config_digest_input, const PublicKey& attestation_pk) {
  ByteWriter w;
  w.raw(kMeasureLabel);
  w.raw(build_identity());
  w.u8(0);
  w.raw(config_digest_input);
  Measurement m;
  const Bytes code = sha256(w.bytes());
  std::copy(code.begin(), code.end(), m.code_hash.begin());
  const Bytes signer = sha256(attestation_pk);
  std::copy(signer.begin(), signer.end(), m.signer_id.begin());
  return m;
}

Session::Session(const SessionId& id, std::span<const std::uint8_t, 32> key, Direction send_direction,
                 std::int64_t established_at, std::int64_t ttl_seconds, std::uint64_t counter_limit)
    : id_(id),
      send_(send_direction),
      recv_(send_direction == Direction::kClientToServer ? Direction::kServerToClient : Direction::kClientToServer),
      established_at_(established_at),
      ttl_seconds_(ttl_seconds),
      counter_limit_(counter_limit) {
  crypto_init();
  std::copy(key.begin(), key.end(), key_.begin());
}

Session::~Session() { sodium_memzero(key_.data(), key_.size()); }

Bytes Session::seal(std::span<const std::uint8_t> plaintext) {
  if (plaintext.size() > UINT32_MAX) fail(ErrorCode::kInvalidInput, "plaintext too large for one frame");
  std::uint64_t counter;
  {
    std::lock_guard lock(mu_);
    if (next_send_ >= counter_limit_) fail(ErrorCode::kSessionExpired, "session nonce counter exhausted");
    counter = next_send_++;
  }
  Bytes frame(kOverhead + plaintext.size());
  std::memcpy(frame.data(), id_.data(), id_.size());
  for (int i = 0; i < 8; ++i) frame[16 + i] = static_cast<std::uint8_t>(counter >> (8 * i));
  const auto len = static_cast<std::uint32_t>(plaintext.size());
  for (int i = 0; i < 4; ++i) frame[24 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  const auto nonce = make_nonce(send_, counter);
  crypto_aead_chacha20poly1305_ietf_encrypt_detached(frame.data() + kHeaderBytes, frame.data() + kHeaderBytes + len,
                                                     nullptr, plaintext.data(), plaintext.size(), frame.data(),
                                                     kHeaderBytes, nullptr, nonce.data(), key_.data());
  return frame;
}

Bytes Session::open(std::span<const std::uint8_t> frame) {
  if (frame.size() < kOverhead) fail(ErrorCode::kSealed, "frame shorter than its fixed overhead");
  ByteReader r(frame, ErrorCode::kSealed);
  SessionId id;
  read_array(r, id);
  const std::uint64_t counter = r.u64();
  const std::uint32_t len = r.u32();
  if (id != id_) fail(ErrorCode::kSealed, "frame belongs to another session");
  if (static_cast<std::uint64_t>(len) + kOverhead != frame.size()) fail(ErrorCode::kSealed, "frame length mismatch");
  std::lock_guard lock(mu_);
  if (last_recv_ && counter <= *last_recv_) fail(ErrorCode::kSealed, "replayed or reordered frame");
  const auto nonce = make_nonce(recv_, counter);
  Bytes plain(len);
  if (crypto_aead_chacha20poly1305_ietf_decrypt_detached(plain.data(), nullptr, frame.data() + kHeaderBytes, len,
                                                         frame.data() + kHeaderBytes + len, frame.data(),
                                                         kHeaderBytes, nonce.data(), key_.data()) != 0) {
    fail(ErrorCode::kSealed, "frame authentication failed");
  }
  last_recv_ = counter;
  return plain;
}

SessionId frame_session_id(std::span<const std::uint8_t> frame) {
  if (frame.size() < Session::kOverhead) fail(ErrorCode::kSealed, "frame shorter than its fixed overhead");
  SessionId id;
  std::copy_n(frame.begin(), id.size(), id.begin());
  return id;
}

Bytes HandshakeResponse::serialize() const {
  ByteWriter w;
  w.raw(measurement.serialize());
  w.raw(server_public);
  w.raw(session_id);
  w.u32(static_cast<std::uint32_t>(context.size()));
  w.raw(context);
  w.raw(signature);
  return w.take();
}

HandshakeResponse HandshakeResponse::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kHandshake);
  HandshakeResponse h;
  h.measurement = Measurement::parse(r.raw(Measurement::kBytes));
  read_array(r, h.server_public);
  read_array(r, h.session_id);
  const std::uint32_t n = r.u32();
  const auto ctx = r.raw(n);
  h.context.assign(ctx.begin(), ctx.end());
  const auto sig = r.raw(AttestationKey::kSignatureBytes);
  h.signature.assign(sig.begin(), sig.end());
  if (r.remaining() != 0) fail(ErrorCode::kHandshake, "trailing bytes in handshake response");
  return h;
}

Bytes handshake_transcript(const Measurement& m, const PublicKey& client_public, const PublicKey& server_public,
                           const SessionId& session_id, std::span<const std::uint8_t> context) {
  ByteWriter w;
  w.raw(kTranscriptLabel);
  w.raw(m.serialize());
  w.raw(client_public);
  w.raw(server_public);
  w.raw(session_id);
  w.u32(static_cast<std::uint32_t>(context.size()));
  w.raw(context);
  return w.take();
}

ServerHandshakeResult server_handshake(const PublicKey& client_public, const Measurement& measurement,
                                       const AttestationKey& key, std::span<const std::uint8_t> context,
                                       std::int64_t now, std::int64_t ttl_seconds) {
  crypto_init();
  ServerHandshakeResult out;
  auto& resp = out.response;
  std::array<std::uint8_t, 32> sk{};
  crypto_box_keypair(resp.server_public.data(), sk.data());
  randombytes_buf(resp.session_id.data(), resp.session_id.size());
  std::array<std::uint8_t, 32> shared{};
  const int rc = crypto_scalarmult(shared.data(), sk.data(), client_public.data());
  sodium_memzero(sk.data(), sk.size());
  if (rc != 0) fail(ErrorCode::kHandshake, "client public key is a low-order point");
  auto session_key = derive_key(shared, client_public, resp.server_public, resp.session_id);
  sodium_memzero(shared.data(), shared.size());
  resp.measurement = measurement;
  resp.context.assign(context.begin(), context.end());
  resp.signature =
      key.sign(handshake_transcript(measurement, client_public, resp.server_public, resp.session_id, context));
  out.session = std::make_shared<Session>(resp.session_id, session_key, Direction::kServerToClient, now, ttl_seconds);
  sodium_memzero(session_key.data(), session_key.size());
  return out;
}

ClientHandshake::ClientHandshake() {
  crypto_init();
  crypto_box_keypair(pk_.data(), sk_.data());
}

ClientHandshake::~ClientHandshake() { sodium_memzero(sk_.data(), sk_.size()); }

std::shared_ptr<Session> ClientHandshake::finish(const HandshakeResponse& response, const PublicKey& attestation_pk,
                                                 const std::optional<Measurement>& expected, std::int64_t now,
                                                 std::int64_t ttl_seconds) {
  const Bytes transcript = handshake_transcript(response.measurement, pk_, response.server_public,
                                                response.session_id, response.context);
  if (!verify_signature(attestation_pk, transcript, response.signature)) {
    fail(ErrorCode::kHandshake, "attestation signature does not verify; refusing the server");
  }
  if (expected && !(*expected == response.measurement)) {
    fail(ErrorCode::kHandshake, "server measurement differs from the expected build");
  }
  const Bytes signer = sha256(attestation_pk);
  if (!std::equal(signer.begin(), signer.end(), response.measurement.signer_id.begin())) {
    fail(ErrorCode::kHandshake, "measurement signer does not match the attestation key");
  }
  std::array<std::uint8_t, 32> shared{};
  if (crypto_scalarmult(shared.data(), sk_.data(), response.server_public.data()) != 0) {
    fail(ErrorCode::kHandshake, "server public key is a low-order point");
  }
  auto key = derive_key(shared, pk_, response.server_public, response.session_id);
  sodium_memzero(shared.data(), shared.size());
  auto session = std::make_shared<Session>(response.session_id, key, Direction::kClientToServer, now, ttl_seconds);
  sodium_memzero(key.data(), key.size());
  return session;
}

void SessionTable::add(std::shared_ptr<Session> session) {
  std::lock_guard lock(mu_);
  sessions_[session->id()] = std::move(session);
}

std::shared_ptr<Session> SessionTable::find(const SessionId& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionTable::erase(const SessionId& id) {
  std::lock_guard lock(mu_);
  sessions_.erase(id);
}

std::size_t SessionTable::purge_expired(std::int64_t now) {
  std::lock_guard lock(mu_);
  return std::erase_if(sessions_, [&](const auto& kv) { return kv.second->expired(now); });
}

std::size_t SessionTable::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace pct
