// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "protocol.hpp"

#include "net.hpp"

namespace pct {

namespace {

bool known_type(std::uint8_t t) {
  return t == 0x01 || t == 0x02 || t == 0x03 || t == 0x04 || t == 0x7F;
}

}  // namespace

void send_message(int fd, MsgType type, std::span<const std::uint8_t> body) {
  if (body.size() > kMaxMessageBody) fail(ErrorCode::kProtocol, "message body too large");
  ByteWriter w(5 + body.size());
  w.u8(static_cast<std::uint8_t>(type));
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(body);
  write_all(fd, w.bytes());
}

void send_error(int fd, ErrorCode code, const std::string& message) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(code));
  w.raw(message);
  send_message(fd, MsgType::kError, w.bytes());
}

std::optional<Message> recv_message(int fd, std::size_t max_body) {
  std::uint8_t header[5];
  if (!read_exact(fd, header, sizeof header)) return std::nullopt;
  if (!known_type(header[0])) fail(ErrorCode::kProtocol, "unknown message type " + std::to_string(header[0]));
  const std::uint32_t len = static_cast<std::uint32_t>(header[1]) | static_cast<std::uint32_t>(header[2]) << 8 |
                            static_cast<std::uint32_t>(header[3]) << 16 | static_cast<std::uint32_t>(header[4]) << 24;
  if (len > max_body) fail(ErrorCode::kProtocol, "message body of " + std::to_string(len) + " bytes exceeds limit");
  Message m{static_cast<MsgType>(header[0]), Bytes(len)};
  if (len > 0 && !read_exact(fd, m.body.data(), len)) fail(ErrorCode::kTransport, "connection closed mid-message");
  return m;
}

void raise_error_message(std::span<const std::uint8_t> body) {
  if (body.empty()) fail(ErrorCode::kProtocol, "server error without details");
  const int code = body[0];
  const std::string msg(reinterpret_cast<const char*>(body.data() + 1), body.size() - 1);
  if (code < static_cast<int>(ErrorCode::kInvalidInput) || code > static_cast<int>(ErrorCode::kTransport)) {
    fail(ErrorCode::kProtocol, "server error: " + msg);
  }
  fail(static_cast<ErrorCode>(code), "server error: " + msg);
}

Bytes encode_theta(const Theta& theta) {
  ByteWriter w(26);
  w.u8(static_cast<std::uint8_t>(theta.geo_digits));
  w.i64(theta.period_start);
  w.i64(theta.period_end);
  w.i64(theta.segment_seconds);
  w.u8(static_cast<std::uint8_t>(theta.time_width));
  return w.take();
}

Theta decode_theta(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kProtocol);
  Theta t;
  t.geo_digits = r.u8();
  t.period_start = r.i64();
  t.period_end = r.i64();
  t.segment_seconds = r.i64();
  t.time_width = r.u8();
  if (r.remaining() != 0) fail(ErrorCode::kProtocol, "trailing bytes after theta");
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kProtocol, std::string("server sent an invalid theta: ") + e.what());
  }
  return t;
}

Bytes encode_query(const std::vector<std::string>& keys, std::size_t key_length) {
  ByteWriter w(6 + keys.size() * key_length);
  w.u32(static_cast<std::uint32_t>(keys.size()));
  w.u16(static_cast<std::uint16_t>(key_length));
  for (const auto& k : keys) {
    if (k.size() != key_length) fail(ErrorCode::kInvalidInput, "query keys must share one length");
    w.raw(k);
  }
  return w.take();
}

std::vector<std::string> decode_query(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kProtocol);
  const std::uint32_t count = r.u32();
  const std::uint16_t len = r.u16();
  if (len == 0 && count > 0) fail(ErrorCode::kProtocol, "zero key length");
  if (static_cast<std::uint64_t>(count) * len != r.remaining()) fail(ErrorCode::kProtocol, "query size mismatch");
  std::vector<std::string> keys;
  keys.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) keys.emplace_back(r.str(len));
  return keys;
}

Bytes encode_response(const ContactResponse& r) {
  ByteWriter w(26 + r.attestation_tag.size());
  w.u64(r.client_id);
  w.u8(static_cast<std::uint8_t>(r.status));
  w.u8(r.contact ? 1 : 0);
  w.u32(r.matched_count);
  w.i64(r.timestamp);
  w.u16(static_cast<std::uint16_t>(r.attestation_tag.size()));
  w.raw(r.attestation_tag);
  return w.take();
}

ContactResponse decode_response(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kProtocol);
  ContactResponse c;
  c.client_id = r.u64();
  const std::uint8_t status = r.u8();
  if (status > 1) fail(ErrorCode::kProtocol, "bad response status");
  c.status = static_cast<ResponseStatus>(status);
  const std::uint8_t contact = r.u8();
  if (contact > 1) fail(ErrorCode::kProtocol, "bad contact flag");
  c.contact = contact == 1;
  c.matched_count = r.u32();
  c.timestamp = r.i64();
  const auto tag = r.raw(r.u16());
  c.attestation_tag.assign(tag.begin(), tag.end());
  if (r.remaining() != 0) fail(ErrorCode::kProtocol, "trailing bytes after response");
  return c;
}

Bytes response_signing_message(const ContactResponse& r) {
  ByteWriter w;
  w.raw(std::string_view("pct-response-v1"));
  w.u64(r.client_id);
  w.u8(static_cast<std::uint8_t>(r.status));
  w.u8(r.contact ? 1 : 0);
  w.u32(r.matched_count);
  w.i64(r.timestamp);
  return w.take();
}

std::uint64_t client_id_of(std::span<const std::uint8_t, 16> session_id) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(session_id[i]) << (8 * i);
  return v;
}

}  // namespace pct
