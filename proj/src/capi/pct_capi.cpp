// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "pct/pct.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "bench.hpp"
#include "chunk_builder.hpp"
#include "client.hpp"
#include "dictionary.hpp"
#include "enclave.hpp"
#include "error.hpp"
#include "generator.hpp"
#include "server.hpp"

struct pct_dict {
  std::unique_ptr<pct::KeyDictionary> impl;
};

struct pct_server {
  std::unique_ptr<pct::Enclave> enclave;
  std::unique_ptr<pct::Server> server;
};

namespace {

thread_local std::string g_last_error;

pct_status fail_with(pct_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename Fn>
pct_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PCT_OK;
  } catch (const pct::Error& e) {
    return fail_with(static_cast<pct_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(PCT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(PCT_ERR_INTERNAL, e.what());
  }
}

pct::Theta to_theta(const pct_theta& t) {
  pct::Theta out;
  out.geo_digits = t.geo_digits;
  out.period_start = t.period_start;
  out.period_end = t.period_end;
  out.segment_seconds = t.segment_seconds;
  out.time_width = t.time_width;
  return out;
}

pct_theta from_theta(const pct::Theta& t) {
  return {t.geo_digits, t.period_start, t.period_end, t.segment_seconds, t.time_width};
}

void require(bool ok, const char* what) {
  if (!ok) pct::fail(pct::ErrorCode::kInvalidInput, what);
}

pct::Backend to_backend(pct_backend b) {
  if (b == PCT_BACKEND_FSA) return pct::Backend::kFsa;
  if (b == PCT_BACKEND_HASH) return pct::Backend::kHash;
  pct::fail(pct::ErrorCode::kConfig, "unknown backend");
}

pct::BuildOptions to_build_options(const pct_ingest_options& o) {
  require(o.out_dir != nullptr, "out_dir is required");
  pct::BuildOptions b;
  b.theta = to_theta(o.theta);
  b.chunk_entries = o.chunk_entries;
  b.backend = to_backend(o.backend);
  b.out_dir = o.out_dir;
  if (o.tmp_dir) b.tmp_dir = o.tmp_dir;
  if (o.run_keys) b.run_keys = o.run_keys;
  return b;
}

void fill_stats(const pct::ChunkManifest& m, const pct::IngestStats& s, pct_ingest_stats* out) {
  if (!out) return;
  out->points = s.points;
  out->dropped_out_of_period = s.dropped_out_of_period;
  out->unique_keys = s.unique_keys;
  out->chunks = m.chunk_count();
  out->total_bytes = m.total_bytes();
  out->max_chunk_bytes = m.max_chunk_bytes();
  out->generation = m.generation;
}

}  // namespace

extern "C" {

const char* pct_last_error(void) { return g_last_error.c_str(); }

const char* pct_status_name(pct_status status) {
  if (status == PCT_OK) return "ok";
  if (status == PCT_ERR_INTERNAL) return "internal";
  return pct::error_code_name(static_cast<pct::ErrorCode>(status));
}

const char* pct_version(void) { return "1.0.0"; }

pct_status pct_encode_point(const pct_theta* theta, int64_t t, double lat, double lon, char* out, size_t out_size) {
  return guarded([&] {
    require(theta && out, "null argument");
    const pct::Theta th = to_theta(*theta);
    th.validate();
    const std::string key = pct::encode_point({t, lat, lon}, th);
    require(out_size > key.size(), "output buffer too small");
    std::memcpy(out, key.c_str(), key.size() + 1);
  });
}

pct_status pct_dict_build(pct_backend backend, const char* keys, size_t count, size_t key_length, pct_dict** out) {
  return guarded([&] {
    require(out != nullptr && (keys != nullptr || count == 0), "null argument");
    std::vector<std::string> v;
    v.reserve(count);
    for (size_t i = 0; i < count; ++i) v.emplace_back(keys + i * key_length, key_length);
    auto d = std::make_unique<pct_dict>();
    d->impl = pct::build_dictionary(to_backend(backend), v, key_length);
    *out = d.release();
  });
}

pct_status pct_dict_load(const uint8_t* bytes, size_t size, pct_dict** out) {
  return guarded([&] {
    require(out != nullptr && (bytes != nullptr || size == 0), "null argument");
    auto d = std::make_unique<pct_dict>();
    d->impl = pct::load_dictionary(std::span(bytes, size));
    *out = d.release();
  });
}

pct_status pct_dict_load_file(const char* path, pct_dict** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto d = std::make_unique<pct_dict>();
    d->impl = pct::load_dictionary(pct::read_file(path));
    *out = d.release();
  });
}

int pct_dict_contains(const pct_dict* dict, const char* key, size_t key_size) {
  if (!dict || !key) return 0;
  return dict->impl->contains(std::string_view(key, key_size)) ? 1 : 0;
}

size_t pct_dict_key_count(const pct_dict* dict) { return dict ? dict->impl->key_count() : 0; }

size_t pct_dict_serialized_bytes(const pct_dict* dict) { return dict ? dict->impl->serialized_bytes() : 0; }

pct_status pct_dict_serialize(const pct_dict* dict, uint8_t* out, size_t capacity, size_t* written) {
  return guarded([&] {
    require(dict && written, "null argument");
    const pct::Bytes b = dict->impl->serialize();
    *written = b.size();
    if (out) std::memcpy(out, b.data(), std::min(capacity, b.size()));
  });
}

void pct_dict_free(pct_dict* dict) { delete dict; }

pct_status pct_ingest(const pct_ingest_options* options, pct_ingest_stats* stats) {
  return guarded([&] {
    require(options && options->input_csv, "input_csv is required");
    const auto points = pct::parse_trajectory_file(options->input_csv);
    pct::IngestStats s;
    const auto m = pct::map_to_chunked_dictionary(points, to_build_options(*options), &s);
    fill_stats(m, s, stats);
  });
}

pct_status pct_update(const pct_ingest_options* options, int64_t expire_before, pct_ingest_stats* stats) {
  return guarded([&] {
    require(options != nullptr, "null argument");
    std::vector<pct::TrajectoryPoint> points;
    if (options->input_csv) points = pct::parse_trajectory_file(options->input_csv);
    pct::IngestStats s;
    const auto m = pct::update_corpus(to_build_options(*options), points, expire_before, &s);
    fill_stats(m, s, stats);
  });
}

void pct_gen_options_init(pct_gen_options* options) {
  if (!options) return;
  const pct::GeneratorConfig g;
  options->people = g.num_people;
  options->points = g.points_per_person;
  options->model = PCT_MODEL_WALK;
  options->seed = g.seed;
  options->lat0 = g.lat0;
  options->lon0 = g.lon0;
  options->lat1 = g.lat1;
  options->lon1 = g.lon1;
  options->out_dir = nullptr;
}

pct_status pct_generate(const pct_gen_options* options) {
  return guarded([&] {
    require(options && options->out_dir, "out_dir is required");
    pct::GeneratorConfig g;
    g.num_people = options->people;
    g.points_per_person = options->points;
    g.model = options->model == PCT_MODEL_UNIFORM ? pct::MobilityModel::kUniform : pct::MobilityModel::kRandomWalk;
    g.seed = options->seed;
    g.lat0 = options->lat0;
    g.lon0 = options->lon0;
    g.lat1 = options->lat1;
    g.lon1 = options->lon1;
    pct::write_generated(options->out_dir, pct::generate_people(g));
  });
}

void pct_server_options_init(pct_server_options* options) {
  if (!options) return;
  const pct::ServerConfig sc;
  const pct::EnclaveConfig ec;
  options->manifest_dir = nullptr;
  options->listen = "127.0.0.1:7700";
  options->batch_count = sc.batch_count;
  options->batch_wait_ms = sc.batch_wait_ms;
  options->budget_bytes = ec.region.budget_bytes;
  options->paging_mode = PCT_PAGING_STRICT;
  options->penalty_ns_per_byte = ec.region.penalty_ns_per_byte;
  options->session_ttl_seconds = ec.session_ttl_seconds;
  options->range_pruning = 0;
  options->admin_socket = nullptr;
  options->quiet = 0;
}

pct_status pct_server_start(const pct_server_options* options, pct_server** out) {
  return guarded([&] {
    require(options && options->manifest_dir && options->listen && out, "manifest_dir and listen are required");
    pct::EnclaveConfig ec;
    ec.region.budget_bytes = options->budget_bytes;
    ec.region.paging_mode =
        options->paging_mode == PCT_PAGING_PENALIZED ? pct::PagingMode::kPenalized : pct::PagingMode::kStrict;
    ec.region.penalty_ns_per_byte = options->penalty_ns_per_byte;
    ec.session_ttl_seconds = options->session_ttl_seconds;
    ec.psi.range_pruning = options->range_pruning != 0;
    pct::ServerConfig sc;
    sc.listen = options->listen;
    sc.batch_count = options->batch_count;
    sc.batch_wait_ms = options->batch_wait_ms;
    if (options->admin_socket) sc.admin_socket = options->admin_socket;
    if (!options->quiet) sc.log = pct::stderr_log_sink();
    auto s = std::make_unique<pct_server>();
    s->enclave = std::make_unique<pct::Enclave>(options->manifest_dir, ec);
    s->server = std::make_unique<pct::Server>(*s->enclave, sc);
    s->server->start();
    *out = s.release();
  });
}

uint16_t pct_server_port(const pct_server* server) { return server ? server->server->port() : 0; }

void pct_server_reload(pct_server* server) {
  if (server) server->server->request_reload();
}

void pct_server_stop(pct_server* server) {
  if (server) server->server->stop();
}

void pct_server_free(pct_server* server) {
  if (!server) return;
  server->server.reset();
  server->enclave.reset();
  delete server;
}

pct_status pct_query(const char* server, const char* input_csv, int timeout_ms, pct_query_result* result) {
  return guarded([&] {
    require(server && input_csv && result, "null argument");
    const auto points = pct::parse_trajectory_file(input_csv);
    pct::ClientOptions o;
    if (timeout_ms > 0) o.timeout_ms = timeout_ms;
    const auto out = pct::client_query(server, points, o);
    result->contact = out.response.contact ? 1 : 0;
    result->rejected = out.response.status == pct::ResponseStatus::kRejected ? 1 : 0;
    result->matched_count = out.response.matched_count;
    result->timestamp = out.response.timestamp;
    result->keys_sent = out.keys_sent;
    result->dropped_out_of_period = out.dropped_out_of_period;
    result->theta = from_theta(out.theta);
  });
}

pct_status pct_bench(const char* kind, const char* config_path, const char* out_csv) {
  return guarded([&] {
    require(kind && out_csv, "kind and out_csv are required");
    pct::ConfigFile cfg = config_path ? pct::ConfigFile::load(config_path) : pct::ConfigFile::parse("");
    const std::string k = kind;
    if (k == "compression") {
      const auto c = pct::CompressionBenchConfig::from(cfg);
      cfg.check_all_used();
      pct::write_report(out_csv, k, pct::compression_csv(pct::run_compression_bench(c)));
    } else if (k == "psi") {
      const auto c = pct::PsiBenchConfig::from(cfg);
      cfg.check_all_used();
      pct::write_report(out_csv, k, pct::psi_csv(pct::run_psi_bench(c)));
    } else {
      pct::fail(pct::ErrorCode::kConfig, "unknown bench kind '" + k + "' (expected compression or psi)");
    }
  });
}

}  // extern "C"
