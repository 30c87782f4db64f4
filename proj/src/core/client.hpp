// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codec.hpp"
#include "psi.hpp"
#include "secure_channel.hpp"

namespace pct {

struct ClientOptions {
  PublicKey attestation_public_key = AttestationKey::stub().public_key();
  std::optional<Measurement> expected_measurement;
  // When set, a server advertising a different theta is refused (kConfig).
  std::optional<Theta> expected_theta;
  int timeout_ms = 120000;
};

struct QueryOutcome {
  ContactResponse response;
  Theta theta;
  Measurement measurement;
  std::size_t keys_sent = 0;
  std::size_t dropped_out_of_period = 0;
};

// Handshake, encode the trajectory under the server's theta, send one sealed
// query and verify the signed response. Errors: kInvalidInput for an empty
// trajectory (before any connection), kHandshake for a rejected attestation,
// kConfig for a theta mismatch, kTransport for network failures, kProtocol
// for malformed replies; server-reported errors keep their code.
QueryOutcome client_query(const std::string& server, const std::vector<TrajectoryPoint>& points,
                          const ClientOptions& options = {});

}  // namespace pct
