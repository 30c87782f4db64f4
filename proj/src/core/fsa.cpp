// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "fsa.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "error.hpp"

namespace pct {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'C', 'T', 'F'};
constexpr std::uint16_t kVersion = 1;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 31;
  h *= 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 29);
}

std::size_t common_prefix(std::string_view a, std::string_view b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace

// Frozen states live in flat arrays; the register indexes them by content.
struct FsaBuilder::Frozen {
  std::vector<std::uint8_t> accept;
  std::vector<std::uint32_t> first{0};
  std::vector<std::uint8_t> labels;
  std::vector<std::uint32_t> targets;
  std::vector<std::uint64_t> hashes;

  struct Hash {
    const Frozen* self;
    std::size_t operator()(std::uint32_t id) const { return static_cast<std::size_t>(self->hashes[id]); }
  };
  struct Equal {
    const Frozen* self;
    bool operator()(std::uint32_t a, std::uint32_t b) const {
      const auto& f = *self;
      if (f.accept[a] != f.accept[b]) return false;
      const auto na = f.first[a + 1] - f.first[a];
      if (na != f.first[b + 1] - f.first[b]) return false;
      return std::memcmp(&f.labels[f.first[a]], &f.labels[f.first[b]], na) == 0 &&
             std::memcmp(&f.targets[f.first[a]], &f.targets[f.first[b]], na * sizeof(std::uint32_t)) == 0;
    }
  };

  std::unordered_set<std::uint32_t, Hash, Equal> reg{1024, Hash{this}, Equal{this}};
};

FsaBuilder::FsaBuilder(std::size_t key_length) : key_length_(key_length), frozen_(std::make_unique<Frozen>()) {
  if (key_length_ > std::numeric_limits<std::uint16_t>::max()) {
    fail(ErrorCode::kInvalidInput, "key length exceeds 65535");
  }
  path_.emplace_back();
}

FsaBuilder::~FsaBuilder() = default;

void FsaBuilder::add(std::string_view key) {
  if (key_length_ == 0) {
    if (key.empty()) fail(ErrorCode::kInvalidInput, "empty key");
    if (key.size() > std::numeric_limits<std::uint16_t>::max()) {
      fail(ErrorCode::kInvalidInput, "key length exceeds 65535");
    }
    key_length_ = key.size();
  }
  if (key.size() != key_length_) {
    fail(ErrorCode::kInvalidInput, "key length " + std::to_string(key.size()) + " differs from " +
                                       std::to_string(key_length_));
  }
  std::size_t prefix = 0;
  if (key_count_ > 0) {
    if (key <= std::string_view(previous_)) {
      fail(ErrorCode::kOrdering, "keys must be strictly increasing: '" + std::string(key) +
                                     "' after '" + previous_ + "'");
    }
    prefix = common_prefix(previous_, key);
  }
  minimize_down_to(prefix);
  for (std::size_t i = prefix; i < key_length_; ++i) {
    auto& trans = path_[i].trans;
    if (trans.size() == 255) fail(ErrorCode::kInvalidInput, "state out-degree exceeds 255");
    trans.emplace_back(static_cast<std::uint8_t>(key[i]), 0);
    path_.emplace_back();
  }
  path_.back().accept = true;
  previous_.assign(key);
  ++key_count_;
}

void FsaBuilder::minimize_down_to(std::size_t depth) {
  while (path_.size() - 1 > depth) {
    const std::uint32_t id = freeze(path_.back());
    path_.pop_back();
    path_.back().trans.back().second = id;
  }
}

std::uint32_t FsaBuilder::freeze(const Node& node) {
  auto& f = *frozen_;
  if (f.accept.size() >= std::numeric_limits<std::uint32_t>::max() - 1) {
    fail(ErrorCode::kInvalidInput, "automaton exceeds 2^32 states");
  }
  const auto id = static_cast<std::uint32_t>(f.accept.size());
  std::uint64_t h = node.accept ? 0x51ULL : 0x17ULL;
  for (const auto& [label, target] : node.trans) {
    f.labels.push_back(label);
    f.targets.push_back(target);
    h = mix(h, (static_cast<std::uint64_t>(target) << 8) | label);
  }
  f.accept.push_back(node.accept ? 1 : 0);
  f.first.push_back(static_cast<std::uint32_t>(f.labels.size()));
  f.hashes.push_back(h);
  auto [it, inserted] = f.reg.insert(id);
  if (inserted) return id;
  // Equivalent state already registered: drop the tentative copy.
  f.accept.pop_back();
  f.first.pop_back();
  f.hashes.pop_back();
  f.labels.resize(f.first.back());
  f.targets.resize(f.first.back());
  return *it;
}

FsaAutomaton FsaBuilder::finish() {
  minimize_down_to(0);
  const std::uint32_t root = freeze(path_[0]);
  auto& f = *frozen_;
  f.reg.clear();

  const std::size_t n = f.accept.size();
  // Reverse postorder with children explored in descending label order.
  std::vector<std::uint8_t> visited(n, 0);
  std::vector<std::uint32_t> post;
  post.reserve(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;  // (state, remaining children)
  stack.emplace_back(root, f.first[root + 1] - f.first[root]);
  visited[root] = 1;
  while (!stack.empty()) {
    auto& [s, k] = stack.back();
    if (k > 0) {
      --k;
      const std::uint32_t child = f.targets[f.first[s] + k];
      if (!visited[child]) {
        visited[child] = 1;
        stack.emplace_back(child, f.first[child + 1] - f.first[child]);
      }
    } else {
      post.push_back(s);
      stack.pop_back();
    }
  }
  std::reverse(post.begin(), post.end());
  std::vector<std::uint32_t> renumber(n, 0);
  for (std::size_t i = 0; i < post.size(); ++i) renumber[post[i]] = static_cast<std::uint32_t>(i);

  FsaAutomaton a;
  a.key_length_ = key_length_;
  a.key_count_ = key_count_;
  a.accept_.resize(post.size());
  a.first_.assign(post.size() + 1, 0);
  a.labels_.reserve(f.labels.size());
  a.targets_.reserve(f.targets.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    const std::uint32_t old = post[i];
    a.accept_[i] = f.accept[old];
    for (std::uint32_t t = f.first[old]; t < f.first[old + 1]; ++t) {
      a.labels_.push_back(f.labels[t]);
      a.targets_.push_back(renumber[f.targets[t]]);
    }
    a.first_[i + 1] = static_cast<std::uint32_t>(a.labels_.size());
  }

  frozen_ = std::make_unique<Frozen>();
  path_.assign(1, Node{});
  previous_.clear();
  key_count_ = 0;
  return a;
}

FsaAutomaton::FsaAutomaton() : accept_{0}, first_{0, 0} {}

FsaAutomaton FsaAutomaton::build(std::span<const std::string> sorted_keys, std::size_t key_length) {
  FsaBuilder builder(key_length);
  for (const auto& k : sorted_keys) builder.add(k);
  return builder.finish();
}

std::int64_t FsaAutomaton::step(std::uint32_t state, std::uint8_t label) const {
  const std::uint32_t end = first_[state + 1];
  for (std::uint32_t t = first_[state]; t < end; ++t) {
    const std::uint8_t l = labels_[t];
    if (l == label) return targets_[t];
    if (l > label) break;
  }
  return -1;
}

bool FsaAutomaton::contains(std::string_view key) const {
  if (key.size() != key_length_ || key_count_ == 0) return false;
  std::uint32_t s = 0;
  for (const char c : key) {
    const auto next = step(s, static_cast<std::uint8_t>(c));
    if (next < 0) return false;
    s = static_cast<std::uint32_t>(next);
  }
  return accept_[s] != 0;
}

void FsaAutomaton::contains_sorted(std::span<const std::string> keys, std::vector<std::uint8_t>& hits) const {
  hits.assign(keys.size(), 0);
  if (key_count_ == 0) return;
  // path[d] is the state reached after d symbols of the previous probe; the
  // first `valid` + 1 entries are usable.
  std::vector<std::uint32_t> path(key_length_ + 1, 0);
  std::size_t valid = 0;
  std::string_view prev;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string_view key = keys[i];
    if (key.size() != key_length_) continue;
    std::size_t d = std::min(common_prefix(prev, key), valid);
    std::uint32_t s = path[d];
    bool ok = true;
    for (; d < key_length_; ++d) {
      const auto next = step(s, static_cast<std::uint8_t>(key[d]));
      if (next < 0) {
        ok = false;
        break;
      }
      s = static_cast<std::uint32_t>(next);
      path[d + 1] = s;
    }
    valid = d;
    prev = key;
    hits[i] = ok && accept_[s] ? 1 : 0;
  }
}

std::uint64_t FsaAutomaton::serialized_bytes() const {
  std::uint64_t n = kHeaderBytes + kTrailerBytes + 2 * state_count() + transition_count();
  for (std::uint32_t s = 0; s + 1 < first_.size(); ++s) {
    for (std::uint32_t t = first_[s]; t < first_[s + 1]; ++t) n += varint_size(targets_[t] - s);
  }
  return n;
}

FsaStats FsaAutomaton::stats() const { return {state_count(), transition_count(), serialized_bytes()}; }

Bytes FsaAutomaton::serialize() const {
  ByteWriter w(static_cast<std::size_t>(serialized_bytes()));
  w.raw(std::span<const std::uint8_t>(kMagic, 4));
  w.u16(kVersion);
  w.u16(static_cast<std::uint16_t>(key_length_));
  w.u64(key_count_);
  w.u64(state_count());
  w.u64(transition_count());
  for (std::uint32_t s = 0; s + 1 < first_.size(); ++s) {
    w.u8(accept_[s]);
    w.u8(static_cast<std::uint8_t>(first_[s + 1] - first_[s]));
    for (std::uint32_t t = first_[s]; t < first_[s + 1]; ++t) {
      w.u8(labels_[t]);
      w.varint(targets_[t] - s);
    }
  }
  w.u32(crc32(w.bytes()));
  return w.take();
}

FsaAutomaton FsaAutomaton::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kFormat);
  auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) fail(ErrorCode::kFormat, "bad FSA magic");
  if (r.u16() != kVersion) fail(ErrorCode::kFormat, "unsupported FSA format version");
  FsaAutomaton a;
  a.key_length_ = r.u16();
  a.key_count_ = r.u64();
  const std::uint64_t states = r.u64();
  const std::uint64_t transitions = r.u64();
  if (states == 0 || states >= std::numeric_limits<std::uint32_t>::max() ||
      transitions >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::kFormat, "FSA header counts out of range");
  }
  if (states * 2 + transitions * 2 + kTrailerBytes > r.remaining()) fail(ErrorCode::kFormat, "truncated FSA");
  a.accept_.assign(states, 0);
  a.first_.assign(states + 1, 0);
  a.labels_.reserve(transitions);
  a.targets_.reserve(transitions);
  for (std::uint64_t s = 0; s < states; ++s) {
    const std::uint8_t accept = r.u8();
    if (accept > 1) fail(ErrorCode::kFormat, "bad accept flag");
    a.accept_[s] = accept;
    const std::uint8_t degree = r.u8();
    int last_label = -1;
    for (int k = 0; k < degree; ++k) {
      const std::uint8_t label = r.u8();
      const std::uint64_t delta = r.varint();
      if (label <= last_label) fail(ErrorCode::kFormat, "transition labels not ascending");
      if (delta == 0 || delta >= states - s) fail(ErrorCode::kFormat, "transition target out of range");
      if (a.labels_.size() == transitions) fail(ErrorCode::kFormat, "transition count mismatch");
      last_label = label;
      a.labels_.push_back(label);
      a.targets_.push_back(static_cast<std::uint32_t>(s + delta));
    }
    a.first_[s + 1] = static_cast<std::uint32_t>(a.labels_.size());
  }
  if (a.labels_.size() != transitions) fail(ErrorCode::kFormat, "transition count mismatch");
  const std::size_t body = r.position();
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after FSA");
  if (crc32(bytes.first(body)) != stored) fail(ErrorCode::kIntegrity, "FSA checksum mismatch");
  return a;
}

std::vector<std::string> FsaAutomaton::keys() const {
  std::vector<std::string> out;
  if (key_count_ == 0) return out;
  std::string prefix;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;  // (state, next transition)
  stack.emplace_back(0, first_[0]);
  while (!stack.empty()) {
    auto& [s, t] = stack.back();
    if (t == first_[s] && accept_[s]) out.push_back(prefix);
    if (t < first_[s + 1]) {
      prefix.push_back(static_cast<char>(labels_[t]));
      const std::uint32_t child = targets_[t];
      ++t;
      stack.emplace_back(child, first_[child]);
    } else {
      stack.pop_back();
      if (!prefix.empty()) prefix.pop_back();
    }
  }
  return out;
}

}  // namespace pct
