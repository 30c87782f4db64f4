// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "dictionary.hpp"

#include <cstring>

#include "error.hpp"
#include "fsa.hpp"
#include "hash_dict.hpp"

namespace pct {

const char* backend_name(Backend b) { return b == Backend::kFsa ? "fsa" : "hash"; }

Backend parse_backend(std::string_view name) {
  if (name == "fsa") return Backend::kFsa;
  if (name == "hash") return Backend::kHash;
  fail(ErrorCode::kConfig, "unknown backend '" + std::string(name) + "'");
}

void KeyDictionary::contains_sorted(std::span<const std::string> keys, std::vector<std::uint8_t>& hits) const {
  hits.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) hits[i] = contains(keys[i]) ? 1 : 0;
}

std::unique_ptr<KeyDictionary> load_dictionary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PCTF", 4) == 0) {
    return std::make_unique<FsaAutomaton>(FsaAutomaton::deserialize(bytes));
  }
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "PCTH", 4) == 0) {
    return std::make_unique<HashDictionary>(HashDictionary::deserialize(bytes));
  }
  fail(ErrorCode::kFormat, "unrecognized dictionary magic");
}

std::unique_ptr<KeyDictionary> build_dictionary(Backend backend, std::span<const std::string> sorted_keys,
                                                std::size_t key_length) {
  if (backend == Backend::kFsa) return std::make_unique<FsaAutomaton>(FsaAutomaton::build(sorted_keys, key_length));
  return std::make_unique<HashDictionary>(HashDictionary::build(sorted_keys, key_length));
}

}  // namespace pct
