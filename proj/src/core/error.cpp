// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "error.hpp"

namespace pct {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kOutOfPeriod: return "out-of-period";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kBudgetExceeded: return "budget-exceeded";
    case ErrorCode::kLogic: return "logic";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kSealed: return "sealed-data";
    case ErrorCode::kSessionExpired: return "session-expired";
    case ErrorCode::kHandshake: return "handshake";
    case ErrorCode::kTransport: return "transport";
  }
  return "unknown";
}

}  // namespace pct
