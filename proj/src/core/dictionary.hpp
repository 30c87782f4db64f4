// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bytes.hpp"

namespace pct {

enum class Backend { kFsa, kHash };

const char* backend_name(Backend b);
Backend parse_backend(std::string_view name);

// Exact membership over a set of equal-length keys. No false positives and no
// false negatives; probabilistic structures cannot implement this contract.
class KeyDictionary {
 public:
  virtual ~KeyDictionary() = default;

  virtual Backend backend() const = 0;
  virtual bool contains(std::string_view key) const = 0;
  virtual std::uint64_t key_count() const = 0;
  virtual std::size_t key_length() const = 0;
  virtual Bytes serialize() const = 0;
  virtual std::uint64_t serialized_bytes() const = 0;
  // The stored key set in increasing order.
  virtual std::vector<std::string> keys() const = 0;

  // Probes a strictly increasing sequence of keys and writes one flag per key.
  // Backends may exploit the ordering; the default probes one at a time.
  virtual void contains_sorted(std::span<const std::string> keys, std::vector<std::uint8_t>& hits) const;
};

// Dispatches on the 4-byte magic ("PCTF" or "PCTH").
std::unique_ptr<KeyDictionary> load_dictionary(std::span<const std::uint8_t> bytes);

std::unique_ptr<KeyDictionary> build_dictionary(Backend backend, std::span<const std::string> sorted_keys,
                                                std::size_t key_length);

}  // namespace pct
