// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dictionary.hpp"
#include "generator.hpp"
#include "psi.hpp"
#include "trusted_region.hpp"

namespace pct {

constexpr int kReportSchemaVersion = 1;

// key=value lines, '#' comments. Every key must be consumed by the driver;
// leftovers are reported as configuration errors so typos do not pass silently.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::string& path);

  std::string str(const std::string& key, const std::string& fallback);
  std::uint64_t u64(const std::string& key, std::uint64_t fallback);
  std::int64_t i64(const std::string& key, std::int64_t fallback);
  double real(const std::string& key, double fallback);
  bool flag(const std::string& key, bool fallback);
  std::vector<std::uint64_t> u64_list(const std::string& key, std::vector<std::uint64_t> fallback);
  std::vector<std::string> str_list(const std::string& key, std::vector<std::string> fallback);

  // Throws kConfig naming any key that no getter asked for.
  void check_all_used() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> used_;
};

struct Timing {
  double median_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
  std::vector<double> samples_ms;
};

// Runs fn warmup times untimed, then `repetitions` times on a monotonic clock.
Timing time_repeated(const std::function<void()>& fn, int repetitions, int warmup);
double median(std::vector<double> values);

// Generator parameters shared by both drivers; reads gen.* keys.
GeneratorConfig generator_from(ConfigFile& cfg);

struct CompressionBenchConfig {
  std::vector<std::uint64_t> sizes = {100000, 500000};
  std::vector<Backend> backends = {Backend::kFsa, Backend::kHash};
  std::vector<MobilityModel> models = {MobilityModel::kRandomWalk};
  std::uint64_t chunk_entries = 10000;  // for the sorted-vs-shuffled comparison
  int shuffle_trials = 1;
  int geo_digits = 10;
  int time_width = 4;
  std::uint64_t probes = 10000;  // membership checks per dictionary before sizes are reported
  GeneratorConfig generator;

  static CompressionBenchConfig from(ConfigFile& cfg);
};

struct CompressionRow {
  std::string section;  // "size", "chunking"
  std::string model;
  std::string backend;
  std::uint64_t keys = 0;
  std::uint64_t chunk_entries = 0;
  std::uint64_t bytes = 0;          // size: dictionary bytes; chunking: sorted total
  std::uint64_t other_bytes = 0;    // chunking: shuffled total
  std::uint64_t fsa_states = 0;
  double ratio = 0;                 // size: bytes / first size; chunking: sorted / shuffled
};

std::vector<CompressionRow> run_compression_bench(const CompressionBenchConfig& config);
std::string compression_csv(const std::vector<CompressionRow>& rows);

struct PsiBenchConfig {
  std::uint64_t corpus_keys = 200000;
  std::vector<std::uint64_t> chunk_entries = {50000, 100000, 200000};
  std::vector<Backend> backends = {Backend::kFsa, Backend::kHash};
  std::vector<std::uint64_t> clients = {100};
  std::uint64_t points_per_client = 1440;
  double contact_fraction = 0.1;
  int repetitions = 5;
  int warmup = 1;
  int geo_digits = 10;
  int time_width = 4;
  RegionConfig region;
  PsiOptions psi;
  bool parallel_checks = false;  // run the correctness checks concurrently
  GeneratorConfig generator;

  static PsiBenchConfig from(ConfigFile& cfg);
};

// Client batches drawn from people independent of the corpus; a
// contact_fraction of them get one corpus key each so contacts occur.
QueryBatch make_client_batch(const GeneratorConfig& generator, const Theta& theta, std::size_t clients,
                             std::size_t points_per_client, double contact_fraction,
                             const std::vector<std::string>& corpus, std::uint64_t seed);

// Per-client contact flags by binary search over the sorted corpus.
std::vector<bool> oracle_contacts(const QueryBatch& batch, const std::vector<std::string>& sorted_corpus);

struct PsiRow {
  std::string backend;
  std::uint64_t corpus_keys = 0;
  std::uint64_t chunk_entries = 0;
  std::uint64_t max_chunk_bytes = 0;
  std::string status;  // "ok" or "budget_exceeded"
  BatchReport report;  // timings are medians over repetitions
  double queries_per_s = 0;
  bool best = false;  // fastest chunk_entries for this backend and batch size
};

std::vector<PsiRow> run_psi_bench(const PsiBenchConfig& config);
std::string psi_csv(const std::vector<PsiRow>& rows);

// Writes the schema header line, then `csv`.
void write_report(const std::string& path, const std::string& kind, const std::string& csv);

}  // namespace pct
