// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hash_dict.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "error.hpp"

namespace pct {

namespace {
constexpr std::uint8_t kMagic[4] = {'P', 'C', 'T', 'H'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

HashDictionary HashDictionary::build(std::span<const std::string> keys, std::size_t key_length) {
  HashDictionary d;
  d.key_length_ = key_length;
  for (const auto& k : keys) {
    if (d.key_length_ == 0) d.key_length_ = k.size();
    if (k.size() != d.key_length_ || k.empty()) fail(ErrorCode::kInvalidInput, "mixed key lengths");
  }
  if (d.key_length_ > std::numeric_limits<std::uint16_t>::max()) {
    fail(ErrorCode::kInvalidInput, "key length exceeds 65535");
  }
  std::vector<std::string_view> sorted(keys.begin(), keys.end());
  if (!std::is_sorted(sorted.begin(), sorted.end())) std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  d.blob_.reserve(sorted.size() * d.key_length_);
  for (const auto k : sorted) d.blob_.insert(d.blob_.end(), k.begin(), k.end());
  d.index();
  return d;
}

void HashDictionary::index() {
  set_.clear();
  if (key_length_ == 0) return;
  const std::size_t n = blob_.size() / key_length_;
  set_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) set_.emplace(blob_.data() + i * key_length_, key_length_);
}

bool HashDictionary::contains(std::string_view key) const {
  return key.size() == key_length_ && set_.find(key) != set_.end();
}

std::vector<std::string> HashDictionary::keys() const {
  std::vector<std::string> out;
  if (key_length_ == 0) return out;
  out.reserve(blob_.size() / key_length_);
  for (std::size_t off = 0; off < blob_.size(); off += key_length_) out.emplace_back(blob_.data() + off, key_length_);
  return out;
}

Bytes HashDictionary::serialize() const {
  ByteWriter w(static_cast<std::size_t>(serialized_bytes()));
  w.raw(std::span<const std::uint8_t>(kMagic, 4));
  w.u16(kVersion);
  w.u16(static_cast<std::uint16_t>(key_length_));
  w.u64(key_count());
  w.raw(std::string_view(blob_.data(), blob_.size()));
  w.u32(crc32(w.bytes()));
  return w.take();
}

HashDictionary HashDictionary::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kFormat);
  auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) fail(ErrorCode::kFormat, "bad hash-dictionary magic");
  if (r.u16() != kVersion) fail(ErrorCode::kFormat, "unsupported hash-dictionary version");
  HashDictionary d;
  d.key_length_ = r.u16();
  const std::uint64_t count = r.u64();
  if (count > 0 && d.key_length_ == 0) fail(ErrorCode::kFormat, "zero key length");
  if (count > (r.remaining() - std::min<std::size_t>(r.remaining(), kTrailerBytes)) / std::max<std::size_t>(d.key_length_, 1)) {
    fail(ErrorCode::kFormat, "truncated hash dictionary");
  }
  auto body = r.raw(static_cast<std::size_t>(count) * d.key_length_);
  const std::size_t end = r.position();
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after hash dictionary");
  if (crc32(bytes.first(end)) != stored) fail(ErrorCode::kIntegrity, "hash-dictionary checksum mismatch");
  d.blob_.assign(body.begin(), body.end());
  for (std::uint64_t i = 1; i < count; ++i) {
    const char* prev = d.blob_.data() + (i - 1) * d.key_length_;
    if (std::memcmp(prev, prev + d.key_length_, d.key_length_) >= 0) {
      fail(ErrorCode::kFormat, "hash-dictionary keys not strictly increasing");
    }
  }
  d.index();
  return d;
}

}  // namespace pct
