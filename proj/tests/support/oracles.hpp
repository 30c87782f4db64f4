// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference implementations. None of these share code with the
// library paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Cell index along one axis after `bits` halvings, computed from dyadic
// thresholds (exact in double for bits <= 32).
inline std::uint64_t axis_index(double v, double lo, double span, int bits) {
  std::uint64_t idx = 0;
  for (int level = 0; level < bits; ++level) {
    const double threshold = lo + static_cast<double>(2 * idx + 1) * span / std::ldexp(1.0, level + 1);
    idx = idx * 2 + (v >= threshold ? 1 : 0);
  }
  return idx;
}

struct GeoCell {
  std::uint64_t lon_idx;
  std::uint64_t lat_idx;
  auto operator<=>(const GeoCell&) const = default;
};

inline GeoCell geo_cell(double lat, double lon, int digits) {
  const int bits = 5 * digits;
  const int lon_bits = (bits + 1) / 2;
  const int lat_bits = bits / 2;
  return {axis_index(lon, -180.0, 360.0, lon_bits), axis_index(lat, -90.0, 180.0, lat_bits)};
}

// Geohash by explicit bit interleaving of the per-axis cell indices.
inline std::string geohash(double lat, double lon, int digits) {
  static const char* kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  const int bits = 5 * digits;
  const int lon_bits = (bits + 1) / 2;
  const int lat_bits = bits / 2;
  const GeoCell cell = geo_cell(lat, lon, digits);
  std::vector<int> stream;
  int li = lon_bits - 1, ai = lat_bits - 1;
  for (int b = 0; b < bits; ++b) {
    if (b % 2 == 0) {
      stream.push_back(static_cast<int>((cell.lon_idx >> li--) & 1));
    } else {
      stream.push_back(static_cast<int>((cell.lat_idx >> ai--) & 1));
    }
  }
  std::string out;
  for (int c = 0; c < digits; ++c) {
    int v = 0;
    for (int k = 0; k < 5; ++k) v = v * 2 + stream[static_cast<std::size_t>(5 * c + k)];
    out.push_back(kAlphabet[v]);
  }
  return out;
}

// Plain prefix tree.
struct Trie {
  std::vector<std::map<unsigned char, int>> next{1};
  std::vector<bool> accept{false};

  explicit Trie(const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
      int s = 0;
      for (unsigned char c : k) {
        auto it = next[s].find(c);
        if (it == next[s].end()) {
          next.emplace_back();
          accept.push_back(false);
          const int id = static_cast<int>(next.size()) - 1;
          next[s][c] = id;
          s = id;
        } else {
          s = it->second;
        }
      }
      accept[s] = true;
    }
  }
  std::size_t node_count() const { return next.size(); }
};

// Hopcroft partition refinement on the trie completed with a sink state.
// Returns the number of equivalence classes with a non-empty right language.
inline std::size_t hopcroft_state_count(const Trie& trie) {
  std::set<unsigned char> alpha_set;
  for (const auto& m : trie.next)
    for (const auto& [c, t] : m) alpha_set.insert(c);
  const std::vector<unsigned char> alpha(alpha_set.begin(), alpha_set.end());
  const int n = static_cast<int>(trie.node_count()) + 1;
  const int sink = n - 1;
  const int k = static_cast<int>(alpha.size());
  std::vector<int> delta(static_cast<std::size_t>(n * std::max(k, 1)), sink);
  for (int s = 0; s + 1 < n; ++s)
    for (int a = 0; a < k; ++a) {
      auto it = trie.next[s].find(alpha[a]);
      if (it != trie.next[s].end()) delta[s * k + a] = it->second;
    }
  // inverse[a][t] = predecessors of t on letter a
  std::vector<std::vector<std::vector<int>>> inverse(k, std::vector<std::vector<int>>(n));
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < k; ++a) inverse[a][delta[s * k + a]].push_back(s);

  std::vector<int> block(n);
  std::vector<std::vector<int>> blocks;
  std::vector<int> finals, others;
  for (int s = 0; s < n; ++s) ((s < n - 1 && trie.accept[s]) ? finals : others).push_back(s);
  for (auto* part : {&finals, &others}) {
    if (part->empty()) continue;
    for (int s : *part) block[s] = static_cast<int>(blocks.size());
    blocks.push_back(*part);
  }
  std::vector<int> work;
  std::vector<bool> in_work(blocks.size(), false);
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    work.push_back(b);
    in_work[b] = true;
  }
  while (!work.empty()) {
    const int splitter = work.back();
    work.pop_back();
    in_work[splitter] = false;
    const std::vector<int> members = blocks[splitter];
    for (int a = 0; a < k; ++a) {
      std::map<int, std::vector<int>> touched;
      for (int t : members)
        for (int p : inverse[a][t]) touched[block[p]].push_back(p);
      for (auto& [b, hit] : touched) {
        std::sort(hit.begin(), hit.end());
        hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
        if (hit.size() == blocks[b].size()) continue;
        std::vector<int> rest;
        std::set<int> hit_set(hit.begin(), hit.end());
        for (int s : blocks[b])
          if (!hit_set.count(s)) rest.push_back(s);
        const int nb = static_cast<int>(blocks.size());
        blocks[b] = hit;
        blocks.push_back(rest);
        in_work.push_back(false);
        for (int s : rest) block[s] = nb;
        if (in_work[b]) {
          work.push_back(nb);
          in_work[nb] = true;
        } else {
          const int smaller = blocks[b].size() <= blocks[nb].size() ? b : nb;
          work.push_back(smaller);
          in_work[smaller] = true;
        }
      }
    }
  }
  return blocks.size() - 1;  // drop the sink class
}

// Sorted-array membership.
inline bool sorted_contains(const std::vector<std::string>& sorted, const std::string& key) {
  return std::binary_search(sorted.begin(), sorted.end(), key);
}

}  // namespace oracle
