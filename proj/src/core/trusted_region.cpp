// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "trusted_region.hpp"

#include <algorithm>

#include "error.hpp"

namespace pct {

PagingMode parse_paging_mode(std::string_view name) {
  if (name == "strict" || name == "STRICT") return PagingMode::kStrict;
  if (name == "penalized" || name == "PENALIZED") return PagingMode::kPenalized;
  fail(ErrorCode::kConfig, "unknown paging mode '" + std::string(name) + "'");
}

const char* paging_mode_name(PagingMode mode) { return mode == PagingMode::kStrict ? "strict" : "penalized"; }

TrustedRegion::TrustedRegion(RegionConfig config) : config_(config) {
  if (config_.budget_bytes == 0) fail(ErrorCode::kConfig, "enclave.budget_bytes must be positive");
}

void TrustedRegion::charge(std::uint64_t bytes, std::string_view what) {
  const std::uint64_t after = used_ + bytes;
  if (after > config_.budget_bytes) {
    if (config_.paging_mode == PagingMode::kStrict) {
      fail(ErrorCode::kBudgetExceeded, "trusted budget exceeded loading " + std::string(what) + ": " +
                                           std::to_string(bytes) + " bytes with " + std::to_string(used_) +
                                           " of " + std::to_string(config_.budget_bytes) + " in use");
    }
    const std::uint64_t beyond = after - std::max(used_, config_.budget_bytes);
    penalty_ns_ += beyond * config_.penalty_ns_per_byte;
  }
  used_ = after;
  peak_ = std::max(peak_, used_);
}

TrustedRegion::Handle TrustedRegion::load(std::uint64_t bytes, std::string_view what) {
  std::lock_guard lock(mu_);
  charge(bytes, what);
  const Handle h = next_++;
  live_.emplace(h, bytes);
  return h;
}

void TrustedRegion::grow(Handle handle, std::uint64_t extra) {
  std::lock_guard lock(mu_);
  auto it = live_.find(handle);
  if (it == live_.end()) fail(ErrorCode::kLogic, "grow on unknown trusted handle");
  charge(extra, "allocation growth");
  it->second += extra;
}

void TrustedRegion::release(Handle handle) {
  std::lock_guard lock(mu_);
  auto it = live_.find(handle);
  if (it == live_.end()) fail(ErrorCode::kLogic, "release of unknown or already released trusted handle");
  used_ -= it->second;
  live_.erase(it);
}

std::uint64_t TrustedRegion::used_bytes() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::uint64_t TrustedRegion::peak_bytes() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::uint64_t TrustedRegion::bytes_of(Handle handle) const {
  std::lock_guard lock(mu_);
  auto it = live_.find(handle);
  if (it == live_.end()) fail(ErrorCode::kLogic, "unknown trusted handle");
  return it->second;
}

double TrustedRegion::paging_penalty_ms() const {
  std::lock_guard lock(mu_);
  return static_cast<double>(penalty_ns_) / 1e6;
}

std::size_t TrustedRegion::live_count() const {
  std::lock_guard lock(mu_);
  return live_.size();
}

void TrustedRegion::reset_peak() {
  std::lock_guard lock(mu_);
  peak_ = used_;
  penalty_ns_ = 0;
}

}  // namespace pct
