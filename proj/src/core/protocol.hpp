// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytes.hpp"
#include "codec.hpp"
#include "error.hpp"
#include "psi.hpp"

namespace pct {

// Wire messages: type u8 | body length u32 | body.
enum class MsgType : std::uint8_t {
  kHandshake = 0x01,      // body: client ephemeral public key (32)
  kHandshakeResp = 0x02,  // body: HandshakeResponse, context = encoded theta
  kQuery = 0x03,          // body: sealed query frame
  kResponse = 0x04,       // body: sealed response frame
  kError = 0x7F,          // body: error code u8 | UTF-8 message
};

constexpr std::size_t kMaxMessageBody = 64u << 20;

struct Message {
  MsgType type;
  Bytes body;
};

void send_message(int fd, MsgType type, std::span<const std::uint8_t> body);
void send_error(int fd, ErrorCode code, const std::string& message);
// nullopt on a clean close; kProtocol for an unknown type or oversized body.
std::optional<Message> recv_message(int fd, std::size_t max_body = kMaxMessageBody);

// Raises the error carried by an ERROR message body.
[[noreturn]] void raise_error_message(std::span<const std::uint8_t> body);

Bytes encode_theta(const Theta& theta);
Theta decode_theta(std::span<const std::uint8_t> bytes);

// Query plaintext: key count u32 | key length u16 | keys concatenated.
Bytes encode_query(const std::vector<std::string>& keys, std::size_t key_length);
std::vector<std::string> decode_query(std::span<const std::uint8_t> bytes);

// Response plaintext: client_id u64 | status u8 | contact u8 |
// matched_count u32 | timestamp i64 | tag length u16 | tag.
Bytes encode_response(const ContactResponse& r);
ContactResponse decode_response(std::span<const std::uint8_t> bytes);

// What the attestation key signs for a response.
Bytes response_signing_message(const ContactResponse& r);

// Client id the enclave assigns to a session: its first 8 id bytes, LE.
std::uint64_t client_id_of(std::span<const std::uint8_t, 16> session_id);

}  // namespace pct
