// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>

#include "bytes.hpp"
#include "error.hpp"
#include "fsa.hpp"

namespace pct {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_as(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    fail(ErrorCode::kConfig, "config: bad value for " + key + ": '" + v + "'");
  }
  return out;
}

const char* model_name(MobilityModel m) { return m == MobilityModel::kRandomWalk ? "walk" : "uniform"; }

// Membership of `dict` must agree with binary search on `keys` for every
// member and for `probes` near-miss strings.
void check_dictionary(const KeyDictionary& dict, const std::vector<std::string>& keys, std::uint64_t probes,
                      std::uint64_t seed) {
  if (dict.key_count() != keys.size()) fail(ErrorCode::kLogic, "dictionary lost keys");
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < probes && !keys.empty(); ++i) {
    std::string probe = keys[rng() % keys.size()];
    if (i % 2 == 1) probe[rng() % probe.size()] = "0123456789bcdefghjkmnpqrstuvwxyz"[rng() % 32];
    const bool expect = std::binary_search(keys.begin(), keys.end(), probe);
    if (dict.contains(probe) != expect) fail(ErrorCode::kLogic, "dictionary membership disagrees with the oracle");
  }
}

std::uint64_t chunked_bytes(const std::vector<std::string>& keys, std::uint64_t chunk_entries, std::size_t key_length) {
  std::uint64_t total = 0;
  std::vector<std::string> slice;
  for (std::size_t i = 0; i < keys.size(); i += chunk_entries) {
    slice.assign(keys.begin() + static_cast<std::ptrdiff_t>(i),
                 keys.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(keys.size(), i + chunk_entries)));
    std::sort(slice.begin(), slice.end());
    total += FsaAutomaton::build(slice, key_length).serialized_bytes();
  }
  return total;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile c;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    c.values_[key] = trim(std::string_view(line).substr(eq + 1));
    c.used_[key] = false;
  }
  return c;
}

ConfigFile ConfigFile::load(const std::string& path) {
  const Bytes b = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
}

std::string ConfigFile::str(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  return it->second;
}

std::uint64_t ConfigFile::u64(const std::string& key, std::uint64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  return parse_as<std::uint64_t>(key, it->second);
}

std::int64_t ConfigFile::i64(const std::string& key, std::int64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  return parse_as<std::int64_t>(key, it->second);
}

double ConfigFile::real(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  return parse_as<double>(key, it->second);
}

bool ConfigFile::flag(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  fail(ErrorCode::kConfig, "config: bad boolean for " + key + ": '" + it->second + "'");
}

std::vector<std::uint64_t> ConfigFile::u64_list(const std::string& key, std::vector<std::uint64_t> fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(it->second)) out.push_back(parse_as<std::uint64_t>(key, item));
  if (out.empty()) fail(ErrorCode::kConfig, "config: empty list for " + key);
  return out;
}

std::vector<std::string> ConfigFile::str_list(const std::string& key, std::vector<std::string> fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_[key] = true;
  auto out = split_list(it->second);
  if (out.empty()) fail(ErrorCode::kConfig, "config: empty list for " + key);
  return out;
}

void ConfigFile::check_all_used() const {
  for (const auto& [key, used] : used_) {
    if (!used) fail(ErrorCode::kConfig, "config: unknown key '" + key + "'");
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

Timing time_repeated(const std::function<void()>& fn, int repetitions, int warmup) {
  if (repetitions < 1) fail(ErrorCode::kConfig, "repetitions must be >= 1");
  for (int i = 0; i < warmup; ++i) fn();
  Timing t;
  for (int i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.samples_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  t.median_ms = median(t.samples_ms);
  t.min_ms = *std::min_element(t.samples_ms.begin(), t.samples_ms.end());
  t.max_ms = *std::max_element(t.samples_ms.begin(), t.samples_ms.end());
  return t;
}

GeneratorConfig generator_from(ConfigFile& cfg) {
  GeneratorConfig g;
  g.points_per_person = cfg.u64("gen.points_per_person", g.points_per_person);
  g.model = parse_mobility_model(cfg.str("gen.model", "walk"));
  g.step_scale_deg = cfg.real("gen.step_scale_deg", g.step_scale_deg);
  g.move_probability = cfg.real("gen.move_probability", g.move_probability);
  g.place_count = cfg.u64("gen.place_count", g.place_count);
  g.place_spread_deg = cfg.real("gen.place_spread_deg", g.place_spread_deg);
  g.interval_seconds = cfg.i64("gen.interval_seconds", g.interval_seconds);
  g.start_time = cfg.i64("gen.start_time", g.start_time);
  g.seed = cfg.u64("gen.seed", g.seed);
  g.lat0 = cfg.real("gen.lat0", g.lat0);
  g.lon0 = cfg.real("gen.lon0", g.lon0);
  g.lat1 = cfg.real("gen.lat1", g.lat1);
  g.lon1 = cfg.real("gen.lon1", g.lon1);
  g.validate();
  return g;
}

CompressionBenchConfig CompressionBenchConfig::from(ConfigFile& cfg) {
  CompressionBenchConfig c;
  c.sizes = cfg.u64_list("sizes", c.sizes);
  std::vector<std::string> backends = cfg.str_list("backends", {"fsa", "hash"});
  c.backends.clear();
  for (const auto& b : backends) c.backends.push_back(parse_backend(b));
  std::vector<std::string> models = cfg.str_list("models", {"walk"});
  c.models.clear();
  for (const auto& m : models) c.models.push_back(parse_mobility_model(m));
  c.chunk_entries = cfg.u64("chunk_entries", c.chunk_entries);
  c.shuffle_trials = static_cast<int>(cfg.u64("shuffle_trials", static_cast<std::uint64_t>(c.shuffle_trials)));
  c.geo_digits = static_cast<int>(cfg.u64("geo_digits", static_cast<std::uint64_t>(c.geo_digits)));
  c.time_width = static_cast<int>(cfg.u64("time_width", static_cast<std::uint64_t>(c.time_width)));
  c.probes = cfg.u64("probes", c.probes);
  c.generator = generator_from(cfg);
  if (c.chunk_entries == 0) fail(ErrorCode::kConfig, "chunk_entries must be >= 1");
  return c;
}

std::vector<CompressionRow> run_compression_bench(const CompressionBenchConfig& config) {
  std::vector<CompressionRow> rows;
  for (const auto model : config.models) {
    GeneratorConfig g = config.generator;
    g.model = model;
    const Theta theta = theta_for(g, config.geo_digits, config.time_width);
    std::map<Backend, std::uint64_t> first_bytes;
    for (const auto size : config.sizes) {
      const auto keys = generate_unique_keys(g, theta, size);
      for (const auto backend : config.backends) {
        CompressionRow row;
        row.section = "size";
        row.model = model_name(model);
        row.backend = backend_name(backend);
        row.keys = size;
        {
          auto dict = build_dictionary(backend, keys, theta.key_length());
          check_dictionary(*dict, keys, config.probes, size);
          row.bytes = dict->serialized_bytes();
          if (backend == Backend::kFsa) row.fsa_states = static_cast<const FsaAutomaton&>(*dict).state_count();
        }
        if (!first_bytes.count(backend)) first_bytes[backend] = row.bytes;
        row.ratio = static_cast<double>(row.bytes) / static_cast<double>(std::max<std::uint64_t>(1, first_bytes[backend]));
        rows.push_back(row);
      }
      std::mt19937_64 rng(g.seed ^ size);
      for (int trial = 0; trial < config.shuffle_trials; ++trial) {
        auto shuffled = keys;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CompressionRow row;
        row.section = "chunking";
        row.model = model_name(model);
        row.backend = "fsa";
        row.keys = size;
        row.chunk_entries = config.chunk_entries;
        row.bytes = chunked_bytes(keys, config.chunk_entries, theta.key_length());
        row.other_bytes = chunked_bytes(shuffled, config.chunk_entries, theta.key_length());
        row.ratio = static_cast<double>(row.bytes) / static_cast<double>(std::max<std::uint64_t>(1, row.other_bytes));
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string compression_csv(const std::vector<CompressionRow>& rows) {
  std::ostringstream out;
  out << "section,model,backend,keys,chunk_entries,bytes,shuffled_bytes,fsa_states,bytes_per_key,ratio\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f,%.6f", r.keys ? static_cast<double>(r.bytes) / static_cast<double>(r.keys) : 0.0,
                  r.ratio);
    out << r.section << ',' << r.model << ',' << r.backend << ',' << r.keys << ',' << r.chunk_entries << ','
        << r.bytes << ',' << r.other_bytes << ',' << r.fsa_states << ',' << buf << '\n';
  }
  return out.str();
}

PsiBenchConfig PsiBenchConfig::from(ConfigFile& cfg) {
  PsiBenchConfig c;
  c.corpus_keys = cfg.u64("corpus_keys", c.corpus_keys);
  c.chunk_entries = cfg.u64_list("chunk_entries", c.chunk_entries);
  std::vector<std::string> backends = cfg.str_list("backends", {"fsa", "hash"});
  c.backends.clear();
  for (const auto& b : backends) c.backends.push_back(parse_backend(b));
  c.clients = cfg.u64_list("clients", c.clients);
  c.points_per_client = cfg.u64("points_per_client", c.points_per_client);
  c.contact_fraction = cfg.real("contact_fraction", c.contact_fraction);
  c.repetitions = static_cast<int>(cfg.u64("repetitions", static_cast<std::uint64_t>(c.repetitions)));
  c.warmup = static_cast<int>(cfg.u64("warmup", static_cast<std::uint64_t>(c.warmup)));
  c.geo_digits = static_cast<int>(cfg.u64("geo_digits", static_cast<std::uint64_t>(c.geo_digits)));
  c.time_width = static_cast<int>(cfg.u64("time_width", static_cast<std::uint64_t>(c.time_width)));
  c.region.budget_bytes = cfg.u64("budget_bytes", c.region.budget_bytes);
  c.region.paging_mode = parse_paging_mode(cfg.str("paging_mode", "strict"));
  c.region.penalty_ns_per_byte = cfg.u64("penalty_ns_per_byte", c.region.penalty_ns_per_byte);
  c.psi.range_pruning = cfg.flag("range_pruning", false);
  c.parallel_checks = cfg.flag("parallel", false);
  c.generator = generator_from(cfg);
  if (c.repetitions < 5) fail(ErrorCode::kConfig, "repetitions must be >= 5 so medians are meaningful");
  if (c.contact_fraction < 0 || c.contact_fraction > 1) fail(ErrorCode::kConfig, "contact_fraction outside [0, 1]");
  for (auto e : c.chunk_entries)
    if (e == 0) fail(ErrorCode::kConfig, "chunk_entries must be >= 1");
  return c;
}

QueryBatch make_client_batch(const GeneratorConfig& generator, const Theta& theta, std::size_t clients,
                             std::size_t points_per_client, double contact_fraction,
                             const std::vector<std::string>& corpus, std::uint64_t seed) {
  GeneratorConfig g = generator;
  g.num_people = clients;
  g.points_per_person = points_per_client;
  g.seed = seed;
  auto people = generate_people(g);
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 7);
  QueryBatch batch(clients);
  for (std::size_t c = 0; c < clients; ++c) {
    batch[c].client_id = c;
    batch[c].keys = encode_trajectory(people[c], theta);
    if (!corpus.empty() && !batch[c].keys.empty() && rng.uniform() < contact_fraction) {
      batch[c].keys[rng.below(batch[c].keys.size())] = corpus[rng.below(corpus.size())];
    }
  }
  return batch;
}

std::vector<bool> oracle_contacts(const QueryBatch& batch, const std::vector<std::string>& sorted_corpus) {
  std::vector<bool> out;
  out.reserve(batch.size());
  for (const auto& c : batch) {
    bool hit = false;
    for (const auto& k : c.keys) {
      if (std::binary_search(sorted_corpus.begin(), sorted_corpus.end(), k)) {
        hit = true;
        break;
      }
    }
    out.push_back(hit);
  }
  return out;
}

std::vector<PsiRow> run_psi_bench(const PsiBenchConfig& config) {
  GeneratorConfig g = config.generator;
  const Theta theta = theta_for(g, config.geo_digits, config.time_width);
  const auto corpus = generate_unique_keys(g, theta, config.corpus_keys);

  struct Setup {
    Backend backend;
    std::uint64_t chunk_entries;
    MemoryChunkStore store;
  };
  std::vector<Setup> setups;
  for (const auto backend : config.backends)
    for (const auto entries : config.chunk_entries)
      setups.push_back({backend, entries, MemoryChunkStore::build(corpus, entries, backend, theta.key_length())});

  std::vector<QueryBatch> batches;
  std::vector<std::vector<bool>> expected;
  for (std::size_t i = 0; i < config.clients.size(); ++i) {
    batches.push_back(make_client_batch(g, theta, config.clients[i], config.points_per_client,
                                        config.contact_fraction, corpus, g.seed + 1000003 * (i + 1)));
    expected.push_back(oracle_contacts(batches.back(), corpus));
  }

  // Correctness first: every configuration must match the oracle before any
  // timing is reported.
  auto check = [&](const Setup& s) {
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const auto q = map_to_unique_array(batches[i], theta);
      const auto r = run_psi(s.store, q, nullptr, config.psi);
      const auto resp = construct_responses(batches[i], q, r, 0);
      for (std::size_t c = 0; c < resp.size(); ++c) {
        if (resp[c].contact != expected[i][c]) {
          fail(ErrorCode::kLogic, std::string("PSI result differs from the oracle for backend ") +
                                      backend_name(s.backend) + " chunk_entries " + std::to_string(s.chunk_entries));
        }
      }
    }
  };
  if (config.parallel_checks) {
    std::vector<std::future<void>> jobs;
    for (const auto& s : setups) jobs.push_back(std::async(std::launch::async, check, std::cref(s)));
    for (auto& j : jobs) j.get();
  } else {
    for (const auto& s : setups) check(s);
  }

  std::vector<PsiRow> rows;
  for (const auto& s : setups) {
    for (std::size_t i = 0; i < batches.size(); ++i) {
      PsiRow row;
      row.backend = backend_name(s.backend);
      row.corpus_keys = corpus.size();
      row.chunk_entries = s.chunk_entries;
      row.max_chunk_bytes = s.store.max_chunk_bytes();
      row.report.clients = batches[i].size();
      row.report.chunks = s.store.chunk_count();
      if (config.region.paging_mode == PagingMode::kStrict && row.max_chunk_bytes > config.region.budget_bytes) {
        row.status = "budget_exceeded";
        rows.push_back(row);
        continue;
      }
      std::vector<BatchReport> reports;
      TrustedRegion region(config.region);
      bool exceeded = false;
      try {
        time_repeated(
            [&] { reports.push_back(run_batch(batches[i], theta, s.store, region, 0, config.psi).report); },
            config.repetitions, config.warmup);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBudgetExceeded) throw;
        exceeded = true;
      }
      if (exceeded) {
        row.status = "budget_exceeded";
        rows.push_back(row);
        continue;
      }
      reports.erase(reports.begin(), reports.begin() + config.warmup);
      auto pick = [&](auto field) {
        std::vector<double> v;
        for (const auto& r : reports) v.push_back(r.*field);
        return median(v);
      };
      row.status = "ok";
      row.report = reports.front();
      row.report.assemble_ms = pick(&BatchReport::assemble_ms);
      row.report.psi_ms = pick(&BatchReport::psi_ms);
      row.report.respond_ms = pick(&BatchReport::respond_ms);
      row.report.paging_penalty_ms = pick(&BatchReport::paging_penalty_ms);
      for (const auto& r : reports) row.report.peak_trusted_bytes = std::max(row.report.peak_trusted_bytes, r.peak_trusted_bytes);
      const double total_ms = row.report.assemble_ms + row.report.psi_ms + row.report.respond_ms;
      row.queries_per_s = total_ms > 0 ? static_cast<double>(row.report.clients) * 1000.0 / total_ms : 0;
      rows.push_back(row);
    }
  }
  // Mark the fastest chunk size per backend and batch size.
  for (auto& row : rows) {
    if (row.status != "ok") continue;
    bool fastest = true;
    for (const auto& other : rows) {
      if (other.status == "ok" && other.backend == row.backend && other.report.clients == row.report.clients &&
          other.report.psi_ms < row.report.psi_ms) {
        fastest = false;
      }
    }
    row.best = fastest;
  }
  return rows;
}

std::string psi_csv(const std::vector<PsiRow>& rows) {
  std::ostringstream out;
  out << "backend,corpus_keys,chunk_entries,max_chunk_bytes,status," << BatchReport::csv_header()
      << ",queries_per_s,best\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.2f", r.queries_per_s);
    out << r.backend << ',' << r.corpus_keys << ',' << r.chunk_entries << ',' << r.max_chunk_bytes << ',' << r.status
        << ',' << r.report.csv_row() << ',' << buf << ',' << (r.best ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_report(const std::string& path, const std::string& kind, const std::string& csv) {
  const std::string text = "# pct-bench schema=" + std::to_string(kReportSchemaVersion) + " kind=" + kind + "\n" + csv;
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace pct
