// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <unordered_set>
#include <vector>

#include "dictionary.hpp"

namespace pct {

// Baseline dictionary: a hash set of views into one contiguous sorted key blob.
// Its serialized form is the blob itself, so size grows linearly with keys.
class HashDictionary final : public KeyDictionary {
 public:
  static constexpr std::size_t kHeaderBytes = 16;
  static constexpr std::size_t kTrailerBytes = 4;

  HashDictionary() = default;
  HashDictionary(const HashDictionary&) = delete;
  HashDictionary& operator=(const HashDictionary&) = delete;
  HashDictionary(HashDictionary&&) = default;
  HashDictionary& operator=(HashDictionary&&) = default;

  // Accepts any multiset of equal-length keys; duplicates collapse.
  static HashDictionary build(std::span<const std::string> keys, std::size_t key_length = 0);
  static HashDictionary deserialize(std::span<const std::uint8_t> bytes);

  Backend backend() const override { return Backend::kHash; }
  bool contains(std::string_view key) const override;
  std::uint64_t key_count() const override { return set_.size(); }
  std::size_t key_length() const override { return key_length_; }
  Bytes serialize() const override;
  std::uint64_t serialized_bytes() const override {
    return kHeaderBytes + blob_.size() + kTrailerBytes;
  }
  std::vector<std::string> keys() const override;

 private:
  void index();

  std::size_t key_length_ = 0;
  std::vector<char> blob_;
  std::unordered_set<std::string_view> set_;
};

}  // namespace pct
