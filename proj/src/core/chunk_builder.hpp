// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codec.hpp"
#include "dictionary.hpp"
#include "external_sort.hpp"

namespace pct {

struct ChunkInfo {
  std::size_t index = 0;
  std::string path;  // relative to the manifest directory
  std::string first_key;
  std::string last_key;
  std::uint64_t key_count = 0;
  std::uint64_t bytes = 0;

  friend bool operator==(const ChunkInfo&, const ChunkInfo&) = default;
};

// The server-side corpus: sorted, deduplicated keys split into chunks that are
// each stored as one dictionary file next to manifest.txt.
struct ChunkManifest {
  static constexpr const char* kFileName = "manifest.txt";

  Theta theta;
  std::uint64_t chunk_entries = 0;
  Backend backend = Backend::kFsa;
  std::uint64_t generation = 0;
  std::uint64_t corpus_key_count = 0;
  std::int64_t created_at = 0;
  std::vector<ChunkInfo> chunks;
  std::string dir;  // directory the manifest was loaded from / written to

  std::size_t chunk_count() const { return chunks.size(); }
  std::string chunk_path(std::size_t i) const { return dir + "/" + chunks[i].path; }
  std::uint64_t total_bytes() const;
  std::uint64_t max_chunk_bytes() const;

  // Throws kFormat if chunk ranges overlap or counts disagree.
  void check_invariants() const;

  std::string to_text() const;
  static ChunkManifest parse(std::string_view text, const std::string& dir);
  static ChunkManifest load(const std::string& dir);
  // Writes manifest.txt.tmp and renames it over manifest.txt.
  void save() const;
};

struct BuildOptions {
  Theta theta;
  std::uint64_t chunk_entries = 1;
  Backend backend = Backend::kFsa;
  std::string out_dir;
  std::size_t run_keys = std::size_t{1} << 22;  // in-memory keys per external-sort run
  std::string tmp_dir;                          // defaults to out_dir
  std::optional<std::int64_t> created_at;       // defaults to the wall clock
};

struct IngestStats {
  std::uint64_t points = 0;
  std::uint64_t dropped_out_of_period = 0;
  std::uint64_t unique_keys = 0;
};

// Streams points or pre-encoded keys in any order and writes the chunked
// dictionary on finish(). Memory use is bounded by BuildOptions::run_keys.
class ChunkBuilder {
 public:
  explicit ChunkBuilder(BuildOptions options, std::uint64_t generation = 1);

  void add_point(const TrajectoryPoint& p);
  void add_key(std::string_view key);
  ChunkManifest finish();

  const IngestStats& stats() const { return stats_; }

 private:
  BuildOptions options_;
  std::uint64_t generation_;
  std::unique_ptr<ExternalKeySorter> sorter_;
  IngestStats stats_;
};

// mapToChunkedDictionary: encode, sort, dedup, split into chunks of at most
// chunk_entries keys and write one dictionary per chunk plus the manifest.
ChunkManifest map_to_chunked_dictionary(const std::vector<TrajectoryPoint>& points, const BuildOptions& options,
                                        IngestStats* stats = nullptr);

// Batch rebuild from the retained keys of the manifest in options.out_dir (if
// any) plus `add`, dropping every key whose segment ends at or before
// expire_before. Throws kConfig if the stored theta differs.
ChunkManifest update_corpus(const BuildOptions& options, const std::vector<TrajectoryPoint>& add,
                            std::int64_t expire_before, IngestStats* stats = nullptr);

// End of the half-open time segment encoded in key's suffix.
std::int64_t key_segment_end(std::string_view key, const Theta& theta);

}  // namespace pct
