// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "client.hpp"

#include <algorithm>

#include "net.hpp"
#include "protocol.hpp"

namespace pct {

namespace {

Message expect(int fd, MsgType type) {
  auto msg = recv_message(fd);
  if (!msg) fail(ErrorCode::kTransport, "server closed the connection");
  if (msg->type == MsgType::kError) raise_error_message(msg->body);
  if (msg->type != type) fail(ErrorCode::kProtocol, "unexpected message type from server");
  return std::move(*msg);
}

}  // namespace

QueryOutcome client_query(const std::string& server, const std::vector<TrajectoryPoint>& points,
                          const ClientOptions& options) {
  if (points.empty()) fail(ErrorCode::kInvalidInput, "trajectory is empty; nothing to query");
  for (const auto& p : points) validate_point(p);

  Socket sock = connect_tcp(server, options.timeout_ms);
  ClientHandshake hello;
  send_message(sock.fd(), MsgType::kHandshake, hello.public_key());
  const Message hs = expect(sock.fd(), MsgType::kHandshakeResp);
  const HandshakeResponse resp = HandshakeResponse::parse(hs.body);
  auto session = hello.finish(resp, options.attestation_public_key, options.expected_measurement, unix_now(), 3600);

  QueryOutcome out;
  out.measurement = resp.measurement;
  out.theta = decode_theta(resp.context);
  if (options.expected_theta && !(*options.expected_theta == out.theta)) {
    fail(ErrorCode::kConfig, "server theta differs from the expected encoding parameters");
  }
  EncodeStats stats;
  std::vector<std::string> keys = encode_trajectory(points, out.theta, &stats);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  out.keys_sent = keys.size();
  out.dropped_out_of_period = stats.dropped_out_of_period;

  const Bytes plain = encode_query(keys, out.theta.key_length());
  send_message(sock.fd(), MsgType::kQuery, session->seal(plain));
  const Message reply = expect(sock.fd(), MsgType::kResponse);
  out.response = decode_response(session->open(reply.body));
  if (out.response.client_id != client_id_of(session->id())) {
    fail(ErrorCode::kProtocol, "response addressed to another client");
  }
  if (!verify_signature(options.attestation_public_key, response_signing_message(out.response),
                        out.response.attestation_tag)) {
    fail(ErrorCode::kHandshake, "response attestation tag does not verify");
  }
  return out;
}

}  // namespace pct
