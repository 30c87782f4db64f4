// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pct {

// Mirrors the pct_status codes exposed through the C API.
enum class ErrorCode : int {
  kInvalidInput = 1,
  kParse = 2,
  kOutOfPeriod = 3,
  kOrdering = 4,
  kFormat = 5,
  kIntegrity = 6,
  kIo = 7,
  kConfig = 8,
  kBudgetExceeded = 9,
  kLogic = 10,
  kProtocol = 11,
  kSealed = 12,
  kSessionExpired = 13,
  kHandshake = 14,
  kTransport = 15,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse errors carry the 1-based line they occurred on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace pct
