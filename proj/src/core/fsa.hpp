// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dictionary.hpp"

namespace pct {

struct FsaStats {
  std::uint64_t state_count = 0;
  std::uint64_t transition_count = 0;
  std::uint64_t serialized_bytes = 0;
};

// Minimal deterministic acyclic automaton over equal-length keys.
//
// States are numbered in canonical order: the reverse postorder of a
// depth-first walk from the start state that visits outgoing transitions in
// descending label order. State 0 is the start state, every transition points
// to a higher-numbered state, and the smallest-label child of a state that is
// first reached through it directly follows it. Two automata accepting the same
// language therefore have identical arrays, which makes serialization
// deterministic.
class FsaAutomaton final : public KeyDictionary {
 public:
  static constexpr std::size_t kHeaderBytes = 32;
  static constexpr std::size_t kTrailerBytes = 4;

  FsaAutomaton();

  // Convenience wrapper over FsaBuilder.
  static FsaAutomaton build(std::span<const std::string> sorted_keys, std::size_t key_length = 0);
  static FsaAutomaton deserialize(std::span<const std::uint8_t> bytes);

  Backend backend() const override { return Backend::kFsa; }
  bool contains(std::string_view key) const override;
  void contains_sorted(std::span<const std::string> keys, std::vector<std::uint8_t>& hits) const override;
  std::uint64_t key_count() const override { return key_count_; }
  std::size_t key_length() const override { return key_length_; }
  Bytes serialize() const override;
  std::uint64_t serialized_bytes() const override;

  FsaStats stats() const;
  std::uint64_t state_count() const { return accept_.size(); }
  std::uint64_t transition_count() const { return labels_.size(); }

  // Graph accessors for oracles and diagnostics.
  bool accepting(std::uint32_t state) const { return accept_[state] != 0; }
  std::span<const std::uint8_t> labels(std::uint32_t state) const {
    return {labels_.data() + first_[state], first_[state + 1] - first_[state]};
  }
  std::span<const std::uint32_t> targets(std::uint32_t state) const {
    return {targets_.data() + first_[state], first_[state + 1] - first_[state]};
  }

  // Enumerates the accepted language in lexicographic order.
  std::vector<std::string> keys() const override;

 private:
  friend class FsaBuilder;

  std::int64_t step(std::uint32_t state, std::uint8_t label) const;

  std::size_t key_length_ = 0;
  std::uint64_t key_count_ = 0;
  std::vector<std::uint8_t> accept_;
  std::vector<std::uint32_t> first_;  // state -> first transition, size state_count + 1
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint32_t> targets_;
};

// Incremental construction from strictly increasing keys: the path of the last
// inserted key stays mutable and everything left of it is frozen and merged
// into a register of states keyed by (accept flag, transition list).
class FsaBuilder {
 public:
  // key_length = 0 adopts the length of the first key.
  explicit FsaBuilder(std::size_t key_length = 0);
  ~FsaBuilder();
  FsaBuilder(const FsaBuilder&) = delete;
  FsaBuilder& operator=(const FsaBuilder&) = delete;

  void add(std::string_view key);
  FsaAutomaton finish();

  std::uint64_t key_count() const { return key_count_; }

 private:
  struct Node {
    bool accept = false;
    std::vector<std::pair<std::uint8_t, std::uint32_t>> trans;
  };
  struct Frozen;

  void minimize_down_to(std::size_t depth);
  std::uint32_t freeze(const Node& node);

  std::size_t key_length_;
  std::uint64_t key_count_ = 0;
  std::string previous_;
  std::vector<Node> path_;
  std::unique_ptr<Frozen> frozen_;
};

}  // namespace pct
