// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunk_builder.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"
#include "fsa.hpp"
#include "hash_dict.hpp"

namespace fs = std::filesystem;

namespace pct {

namespace {

std::string chunk_file_name(std::uint64_t generation, std::size_t index, Backend backend) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "chunk_g%llu_%06zu.%s", static_cast<unsigned long long>(generation), index,
                backend == Backend::kFsa ? "fsa" : "hash");
  return buf;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::kFormat, std::string("manifest: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

// Accumulates keys for the current chunk and writes it when full.
class ChunkWriter {
 public:
  ChunkWriter(const BuildOptions& options, std::uint64_t generation, ChunkManifest& manifest)
      : options_(options), generation_(generation), manifest_(manifest) {}

  void add(std::string_view key) {
    if (pending_ == 0) {
      first_.assign(key);
      if (options_.backend == Backend::kFsa) fsa_ = std::make_unique<FsaBuilder>(options_.theta.key_length());
    }
    if (fsa_) {
      fsa_->add(key);
    } else {
      hash_keys_.emplace_back(key);
    }
    last_.assign(key);
    if (++pending_ == options_.chunk_entries) flush();
  }

  void flush() {
    if (pending_ == 0) return;
    Bytes bytes;
    if (fsa_) {
      bytes = fsa_->finish().serialize();
      fsa_.reset();
    } else {
      bytes = HashDictionary::build(hash_keys_, options_.theta.key_length()).serialize();
      hash_keys_.clear();
    }
    ChunkInfo info;
    info.index = manifest_.chunks.size();
    info.path = chunk_file_name(generation_, info.index, options_.backend);
    info.first_key = first_;
    info.last_key = last_;
    info.key_count = pending_;
    info.bytes = bytes.size();
    write_file(options_.out_dir + "/" + info.path, bytes);
    manifest_.chunks.push_back(std::move(info));
    manifest_.corpus_key_count += pending_;
    pending_ = 0;
  }

 private:
  const BuildOptions& options_;
  std::uint64_t generation_;
  ChunkManifest& manifest_;
  std::unique_ptr<FsaBuilder> fsa_;
  std::vector<std::string> hash_keys_;
  std::string first_, last_;
  std::uint64_t pending_ = 0;
};

void remove_stale_chunks(const ChunkManifest& m) {
  // Keep the current and the immediately previous generation; readers may
  // still hold the previous manifest.
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(m.dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("chunk_g", 0) != 0) continue;
    const auto us = name.find('_', 7);
    if (us == std::string::npos) continue;
    std::uint64_t gen = 0;
    auto [ptr, err] = std::from_chars(name.data() + 7, name.data() + us, gen);
    if (err != std::errc{}) continue;
    if (gen + 1 < m.generation) fs::remove(entry.path(), ec);
  }
}

}  // namespace

std::uint64_t ChunkManifest::total_bytes() const {
  std::uint64_t n = 0;
  for (const auto& c : chunks) n += c.bytes;
  return n;
}

std::uint64_t ChunkManifest::max_chunk_bytes() const {
  std::uint64_t n = 0;
  for (const auto& c : chunks) n = std::max(n, c.bytes);
  return n;
}

void ChunkManifest::check_invariants() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    if (c.index != i) fail(ErrorCode::kFormat, "manifest: chunk indices out of order");
    if (c.first_key > c.last_key) fail(ErrorCode::kFormat, "manifest: inverted key range");
    if (i > 0 && !(chunks[i - 1].last_key < c.first_key)) {
      fail(ErrorCode::kFormat, "manifest: chunk key ranges overlap");
    }
    if (c.key_count == 0 || (chunk_entries > 0 && c.key_count > chunk_entries)) {
      fail(ErrorCode::kFormat, "manifest: chunk key count out of range");
    }
    sum += c.key_count;
  }
  if (sum != corpus_key_count) fail(ErrorCode::kFormat, "manifest: chunk key counts do not sum to corpus size");
}

std::string ChunkManifest::to_text() const {
  std::ostringstream out;
  out << "# pct chunk manifest\n";
  out << "format=1\n";
  out << "theta.geo_digits=" << theta.geo_digits << "\n";
  out << "theta.period_start=" << theta.period_start << "\n";
  out << "theta.period_end=" << theta.period_end << "\n";
  out << "theta.segment_seconds=" << theta.segment_seconds << "\n";
  out << "theta.time_width=" << theta.time_width << "\n";
  out << "chunk_entries=" << chunk_entries << "\n";
  out << "backend=" << backend_name(backend) << "\n";
  out << "generation=" << generation << "\n";
  out << "corpus_key_count=" << corpus_key_count << "\n";
  out << "created_at=" << created_at << "\n";
  out << "# chunk_index\tpath\tfirst_key\tlast_key\tkey_count\tbytes\n";
  for (const auto& c : chunks) {
    out << c.index << '\t' << c.path << '\t' << c.first_key << '\t' << c.last_key << '\t' << c.key_count << '\t'
        << c.bytes << '\n';
  }
  return out.str();
}

ChunkManifest ChunkManifest::parse(std::string_view text, const std::string& dir) {
  ChunkManifest m;
  m.dir = dir;
  std::map<std::string, std::string, std::less<>> header;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line.find('\t') != std::string_view::npos) {
      std::vector<std::string_view> f;
      std::size_t s = 0;
      while (true) {
        const auto tab = line.find('\t', s);
        f.push_back(line.substr(s, tab == std::string_view::npos ? std::string_view::npos : tab - s));
        if (tab == std::string_view::npos) break;
        s = tab + 1;
      }
      if (f.size() != 6) fail(ErrorCode::kFormat, "manifest: chunk line needs 6 fields");
      ChunkInfo c;
      c.index = parse_number<std::size_t>(f[0], "chunk_index");
      c.path = std::string(f[1]);
      if (c.path.empty() || c.path.find('/') != std::string::npos) fail(ErrorCode::kFormat, "manifest: bad chunk path");
      c.first_key = std::string(f[2]);
      c.last_key = std::string(f[3]);
      c.key_count = parse_number<std::uint64_t>(f[4], "key_count");
      c.bytes = parse_number<std::uint64_t>(f[5], "bytes");
      m.chunks.push_back(std::move(c));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::kFormat, "manifest: unrecognized line '" + std::string(line) + "'");
    header.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  auto get = [&](const char* key) -> std::string_view {
    auto it = header.find(key);
    if (it == header.end()) fail(ErrorCode::kFormat, std::string("manifest: missing ") + key);
    return it->second;
  };
  m.theta.geo_digits = parse_number<int>(get("theta.geo_digits"), "theta.geo_digits");
  m.theta.period_start = parse_number<std::int64_t>(get("theta.period_start"), "theta.period_start");
  m.theta.period_end = parse_number<std::int64_t>(get("theta.period_end"), "theta.period_end");
  m.theta.segment_seconds = parse_number<std::int64_t>(get("theta.segment_seconds"), "theta.segment_seconds");
  m.theta.time_width = parse_number<int>(get("theta.time_width"), "theta.time_width");
  m.chunk_entries = parse_number<std::uint64_t>(get("chunk_entries"), "chunk_entries");
  if (header.count("backend")) {
    try {
      m.backend = parse_backend(header.find("backend")->second);
    } catch (const Error&) {
      fail(ErrorCode::kFormat, "manifest: unknown backend");
    }
  }
  if (header.count("generation")) m.generation = parse_number<std::uint64_t>(get("generation"), "generation");
  if (header.count("created_at")) m.created_at = parse_number<std::int64_t>(get("created_at"), "created_at");
  if (header.count("corpus_key_count")) {
    m.corpus_key_count = parse_number<std::uint64_t>(get("corpus_key_count"), "corpus_key_count");
  } else {
    for (const auto& c : m.chunks) m.corpus_key_count += c.key_count;
  }
  try {
    m.theta.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("manifest: ") + e.what());
  }
  m.check_invariants();
  return m;
}

ChunkManifest ChunkManifest::load(const std::string& dir) {
  const Bytes bytes = read_file(dir + "/" + kFileName);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), dir);
}

void ChunkManifest::save() const {
  const std::string text = to_text();
  write_file_atomic(dir + "/" + kFileName,
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ChunkBuilder::ChunkBuilder(BuildOptions options, std::uint64_t generation)
    : options_(std::move(options)), generation_(generation) {
  options_.theta.validate();
  if (options_.chunk_entries < 1) fail(ErrorCode::kConfig, "chunk_entries must be >= 1");
  if (options_.out_dir.empty()) fail(ErrorCode::kConfig, "output directory required");
  std::error_code ec;
  fs::create_directories(options_.out_dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + options_.out_dir + ": " + ec.message());
  sorter_ = std::make_unique<ExternalKeySorter>(options_.theta.key_length(), options_.run_keys,
                                                options_.tmp_dir.empty() ? options_.out_dir : options_.tmp_dir);
}

void ChunkBuilder::add_point(const TrajectoryPoint& p) {
  ++stats_.points;
  if (p.t < options_.theta.period_start || p.t >= options_.theta.period_end) {
    ++stats_.dropped_out_of_period;
    return;
  }
  sorter_->add(encode_point(p, options_.theta));
}

void ChunkBuilder::add_key(std::string_view key) {
  if (!key_well_formed(key, options_.theta)) fail(ErrorCode::kInvalidInput, "malformed key '" + std::string(key) + "'");
  sorter_->add(key);
}

ChunkManifest ChunkBuilder::finish() {
  ChunkManifest m;
  m.theta = options_.theta;
  m.chunk_entries = options_.chunk_entries;
  m.backend = options_.backend;
  m.generation = generation_;
  m.dir = options_.out_dir;
  m.created_at = options_.created_at.value_or(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
  ChunkWriter writer(options_, generation_, m);
  sorter_->merge([&](std::string_view key) { writer.add(key); });
  writer.flush();
  stats_.unique_keys = m.corpus_key_count;
  m.check_invariants();
  m.save();
  remove_stale_chunks(m);
  return m;
}

ChunkManifest map_to_chunked_dictionary(const std::vector<TrajectoryPoint>& points, const BuildOptions& options,
                                        IngestStats* stats) {
  std::uint64_t generation = 1;
  if (fs::exists(options.out_dir + "/" + ChunkManifest::kFileName)) {
    generation = ChunkManifest::load(options.out_dir).generation + 1;
  }
  ChunkBuilder builder(options, generation);
  for (const auto& p : points) builder.add_point(p);
  auto m = builder.finish();
  if (stats) *stats = builder.stats();
  return m;
}

std::int64_t key_segment_end(std::string_view key, const Theta& theta) {
  const auto label = key.substr(static_cast<std::size_t>(theta.geo_digits));
  std::int64_t segment = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), segment);
  if (ec != std::errc{} || ptr != label.data() + label.size()) fail(ErrorCode::kInvalidInput, "bad time label");
  return theta.period_start + (segment + 1) * theta.segment_seconds;
}

ChunkManifest update_corpus(const BuildOptions& options, const std::vector<TrajectoryPoint>& add,
                            std::int64_t expire_before, IngestStats* stats) {
  std::optional<ChunkManifest> previous;
  if (fs::exists(options.out_dir + "/" + ChunkManifest::kFileName)) {
    previous = ChunkManifest::load(options.out_dir);
    if (!(previous->theta == options.theta)) {
      fail(ErrorCode::kConfig, "theta of the update differs from the stored corpus");
    }
  }
  ChunkBuilder builder(options, previous ? previous->generation + 1 : 1);
  if (previous) {
    for (std::size_t i = 0; i < previous->chunk_count(); ++i) {
      const auto dict = load_dictionary(read_file(previous->chunk_path(i)));
      for (const auto& key : dict->keys()) {
        if (key_segment_end(key, options.theta) > expire_before) builder.add_key(key);
      }
    }
  }
  for (const auto& p : add) {
    if (p.t >= options.theta.period_start && p.t < options.theta.period_end) {
      const auto key = encode_point(p, options.theta);
      if (key_segment_end(key, options.theta) > expire_before) builder.add_key(key);
      continue;
    }
    builder.add_point(p);  // counted as dropped
  }
  auto m = builder.finish();
  if (stats) *stats = builder.stats();
  return m;
}

}  // namespace pct
