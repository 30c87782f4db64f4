// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace pct {

enum class PagingMode { kStrict, kPenalized };

PagingMode parse_paging_mode(std::string_view name);
const char* paging_mode_name(PagingMode mode);

struct RegionConfig {
  std::uint64_t budget_bytes = 96ull << 20;
  PagingMode paging_mode = PagingMode::kStrict;
  std::uint64_t penalty_ns_per_byte = 0;
};

// Accounting model of the enclave's protected memory. Every object that lives
// on the trusted side is charged here at its serialized size. STRICT mode
// refuses any allocation beyond the budget; PENALIZED mode admits it and
// accrues a simulated paging cost proportional to the bytes beyond budget.
class TrustedRegion {
 public:
  using Handle = std::uint64_t;

  explicit TrustedRegion(RegionConfig config = {});

  // loadToEnclave: charges `bytes`; throws kBudgetExceeded in STRICT mode.
  Handle load(std::uint64_t bytes, std::string_view what);
  // Grows a live allocation (e.g. the Results set as matches accumulate).
  void grow(Handle handle, std::uint64_t extra);
  // loadFromEnclave: releases the allocation; unknown or released handles
  // raise kLogic.
  void release(Handle handle);

  std::uint64_t used_bytes() const;
  std::uint64_t peak_bytes() const;
  std::uint64_t bytes_of(Handle handle) const;
  double paging_penalty_ms() const;
  std::size_t live_count() const;
  const RegionConfig& config() const { return config_; }

  void reset_peak();

 private:
  void charge(std::uint64_t bytes, std::string_view what);

  RegionConfig config_;
  mutable std::mutex mu_;
  std::map<Handle, std::uint64_t> live_;
  Handle next_ = 1;
  std::uint64_t used_ = 0;
  std::uint64_t peak_ = 0;
  std::uint64_t penalty_ns_ = 0;
};

// Releases its allocation on destruction.
class RegionLease {
 public:
  RegionLease() = default;
  RegionLease(TrustedRegion& region, std::uint64_t bytes, std::string_view what)
      : region_(&region), handle_(region.load(bytes, what)) {}
  RegionLease(const RegionLease&) = delete;
  RegionLease& operator=(const RegionLease&) = delete;
  RegionLease(RegionLease&& other) noexcept : region_(other.region_), handle_(other.handle_) {
    other.region_ = nullptr;
  }
  RegionLease& operator=(RegionLease&& other) noexcept {
    if (this != &other) {
      reset();
      region_ = other.region_;
      handle_ = other.handle_;
      other.region_ = nullptr;
    }
    return *this;
  }
  ~RegionLease() { reset(); }

  void grow(std::uint64_t extra) { region_->grow(handle_, extra); }
  void reset() {
    if (region_) region_->release(handle_);
    region_ = nullptr;
  }

 private:
  TrustedRegion* region_ = nullptr;
  TrustedRegion::Handle handle_ = 0;
};

}  // namespace pct
