// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

// The pct command line. Exit codes: 0 ok, 1 usage, 2 I/O or bad input,
// 3 protocol or transport, 4 budget or configuration.

#include <signal.h>

#include <CLI11.hpp>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pct/pct.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitConfig = 4;

int exit_code_for(pct_status s) {
  switch (s) {
    case PCT_OK:
      return kExitOk;
    case PCT_ERR_PROTOCOL:
    case PCT_ERR_SEALED:
    case PCT_ERR_SESSION_EXPIRED:
    case PCT_ERR_HANDSHAKE:
    case PCT_ERR_TRANSPORT:
      return kExitProtocol;
    case PCT_ERR_CONFIG:
    case PCT_ERR_BUDGET_EXCEEDED:
      return kExitConfig;
    default:
      return kExitIo;
  }
}

int report(pct_status s) {
  if (s != PCT_OK) std::fprintf(stderr, "pct: %s: %s\n", pct_status_name(s), pct_last_error());
  return exit_code_for(s);
}

void print_stats(const pct_ingest_stats& st) {
  std::printf("points=%llu dropped_out_of_period=%llu unique_keys=%llu chunks=%llu total_bytes=%llu "
              "max_chunk_bytes=%llu generation=%llu\n",
              static_cast<unsigned long long>(st.points), static_cast<unsigned long long>(st.dropped_out_of_period),
              static_cast<unsigned long long>(st.unique_keys), static_cast<unsigned long long>(st.chunks),
              static_cast<unsigned long long>(st.total_bytes), static_cast<unsigned long long>(st.max_chunk_bytes),
              static_cast<unsigned long long>(st.generation));
}

struct IngestArgs {
  std::string input, out, tmp_dir, backend = "fsa";
  int geo_digits = 10, time_width = 4;
  int64_t segment_seconds = 0, period_start = 0, period_end = 0;
  uint64_t chunk_entries = 100000, run_keys = 0;
  int64_t expire_before = 0;
  bool update = false;
};

int run_ingest(const IngestArgs& a) {
  pct_ingest_options o{};
  o.input_csv = a.input.empty() ? nullptr : a.input.c_str();
  o.out_dir = a.out.c_str();
  o.theta = pct_theta{a.geo_digits, a.period_start, a.period_end, a.segment_seconds, a.time_width};
  o.chunk_entries = a.chunk_entries;
  o.backend = a.backend == "hash" ? PCT_BACKEND_HASH : PCT_BACKEND_FSA;
  o.tmp_dir = a.tmp_dir.empty() ? nullptr : a.tmp_dir.c_str();
  o.run_keys = a.run_keys;
  pct_ingest_stats st{};
  const pct_status s = a.update ? pct_update(&o, a.expire_before, &st) : pct_ingest(&o, &st);
  if (s == PCT_OK) print_stats(st);
  return report(s);
}

struct ServeArgs {
  std::string manifest, listen = "127.0.0.1:7700", paging = "strict", admin_socket;
  uint64_t batch_count = 1000, budget_bytes = 96ull << 20, penalty_ns_per_byte = 0;
  int64_t batch_wait_ms = 1000, session_ttl = 600;
  bool range_pruning = false, quiet = false;
};

// SIGHUP reloads the manifest; SIGINT and SIGTERM stop the server.
int run_serve(const ServeArgs& a) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  pct_server_options o;
  pct_server_options_init(&o);
  o.manifest_dir = a.manifest.c_str();
  o.listen = a.listen.c_str();
  o.batch_count = a.batch_count;
  o.batch_wait_ms = a.batch_wait_ms;
  o.budget_bytes = a.budget_bytes;
  o.paging_mode = a.paging == "penalized" ? PCT_PAGING_PENALIZED : PCT_PAGING_STRICT;
  o.penalty_ns_per_byte = a.penalty_ns_per_byte;
  o.session_ttl_seconds = a.session_ttl;
  o.range_pruning = a.range_pruning ? 1 : 0;
  o.admin_socket = a.admin_socket.empty() ? nullptr : a.admin_socket.c_str();
  o.quiet = a.quiet ? 1 : 0;
  pct_server* server = nullptr;
  const pct_status s = pct_server_start(&o, &server);
  if (s != PCT_OK) return report(s);
  std::printf("listening port=%u\n", pct_server_port(server));
  std::fflush(stdout);

  for (;;) {
    int sig = 0;
    if (sigwait(&set, &sig) != 0) continue;
    if (sig == SIGHUP) {
      pct_server_reload(server);
      continue;
    }
    break;
  }
  pct_server_stop(server);
  pct_server_free(server);
  return kExitOk;
}

int run_query(const std::string& server, const std::string& input, int timeout_ms) {
  pct_query_result r{};
  const pct_status s = pct_query(server.c_str(), input.c_str(), timeout_ms, &r);
  if (s != PCT_OK) return report(s);
  std::printf("status=%s contact=%s matched_count=%u timestamp=%lld keys_sent=%llu dropped_out_of_period=%llu\n",
              r.rejected ? "rejected" : "ok", r.contact ? "true" : "false", r.matched_count,
              static_cast<long long>(r.timestamp), static_cast<unsigned long long>(r.keys_sent),
              static_cast<unsigned long long>(r.dropped_out_of_period));
  return kExitOk;
}

struct GenArgs {
  uint64_t people = 1, points = 1440, seed = 1;
  std::string model = "walk", bbox, out;
};

int run_gen(const GenArgs& a) {
  pct_gen_options o;
  pct_gen_options_init(&o);
  o.people = a.people;
  o.points = a.points;
  o.seed = a.seed;
  o.model = a.model == "uniform" ? PCT_MODEL_UNIFORM : PCT_MODEL_WALK;
  o.out_dir = a.out.c_str();
  if (!a.bbox.empty()) {
    std::vector<double> v;
    std::stringstream in(a.bbox);
    std::string field;
    while (std::getline(in, field, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        std::fprintf(stderr, "pct: --bbox: '%s' is not a number\n", field.c_str());
        return kExitUsage;
      }
    }
    if (v.size() != 4) {
      std::fprintf(stderr, "pct: --bbox needs lat0,lon0,lat1,lon1\n");
      return kExitUsage;
    }
    o.lat0 = v[0];
    o.lon0 = v[1];
    o.lat1 = v[2];
    o.lon1 = v[3];
  }
  return report(pct_generate(&o));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private contact tracing over chunked automaton dictionaries"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pct_version()));

  IngestArgs ingest;
  auto* ci = app.add_subcommand("ingest", "Encode a trajectory CSV into a chunked corpus");
  ci->add_option("--input", ingest.input, "Trajectory CSV (epoch_seconds,latitude,longitude)");
  ci->add_option("--out", ingest.out, "Corpus directory")->required();
  ci->add_option("--geo-digits", ingest.geo_digits, "Geohash digits")->capture_default_str();
  ci->add_option("--time-width", ingest.time_width, "Segment label width")->capture_default_str();
  ci->add_option("--segment-seconds", ingest.segment_seconds, "Time segment length")->required();
  ci->add_option("--period-start", ingest.period_start, "Period start, epoch seconds")->required();
  ci->add_option("--period-end", ingest.period_end, "Period end, epoch seconds (exclusive)")->required();
  ci->add_option("--chunk-entries", ingest.chunk_entries, "Keys per chunk")->capture_default_str();
  ci->add_option("--backend", ingest.backend, "Dictionary backend")
      ->check(CLI::IsMember({"fsa", "hash"}))
      ->capture_default_str();
  ci->add_option("--tmp-dir", ingest.tmp_dir, "Directory for external-sort runs");
  ci->add_option("--run-keys", ingest.run_keys, "Keys held in memory per sort run");
  auto* expire = ci->add_option("--expire-before", ingest.expire_before,
                                "Rebuild the existing corpus, dropping segments ending at or before this time");

  ServeArgs serve;
  auto* cs = app.add_subcommand("serve", "Run the contact-query server");
  cs->add_option("--manifest", serve.manifest, "Corpus directory")->required();
  cs->add_option("--listen", serve.listen, "host:port")->capture_default_str();
  cs->add_option("--batch-count", serve.batch_count, "Clients per batch")->capture_default_str();
  cs->add_option("--batch-wait-ms", serve.batch_wait_ms, "Longest wait before a partial batch runs")
      ->capture_default_str();
  cs->add_option("--budget-bytes", serve.budget_bytes, "Trusted memory budget")->capture_default_str();
  cs->add_option("--paging", serve.paging, "Behaviour beyond the budget")
      ->check(CLI::IsMember({"strict", "penalized"}))
      ->capture_default_str();
  cs->add_option("--penalty-ns-per-byte", serve.penalty_ns_per_byte, "Simulated paging cost")->capture_default_str();
  cs->add_option("--session-ttl", serve.session_ttl, "Session lifetime in seconds")->capture_default_str();
  cs->add_flag("--range-pruning", serve.range_pruning, "Probe only keys inside each chunk's range");
  cs->add_option("--admin-socket", serve.admin_socket, "Unix socket accepting 'reload' and 'stats'");
  cs->add_flag("--quiet", serve.quiet, "No log lines");

  std::string q_server, q_input;
  int q_timeout = 120000;
  auto* cq = app.add_subcommand("query", "Ask the server whether a trajectory had contact");
  cq->add_option("--server", q_server, "host:port")->required();
  cq->add_option("--input", q_input, "Trajectory CSV")->required();
  cq->add_option("--timeout-ms", q_timeout, "Network timeout")->capture_default_str();

  GenArgs gen;
  auto* cg = app.add_subcommand("gen", "Generate synthetic trajectories");
  cg->add_option("--people", gen.people)->capture_default_str();
  cg->add_option("--points", gen.points, "Points per person")->capture_default_str();
  cg->add_option("--model", gen.model)->check(CLI::IsMember({"walk", "uniform"}))->capture_default_str();
  cg->add_option("--seed", gen.seed)->capture_default_str();
  cg->add_option("--bbox", gen.bbox, "lat0,lon0,lat1,lon1");
  cg->add_option("--out", gen.out, "Output directory")->required();

  std::string b_kind, b_config, b_out;
  auto* cb = app.add_subcommand("bench", "Run a benchmark and write a CSV report");
  cb->add_option("kind", b_kind)->required()->check(CLI::IsMember({"compression", "psi"}));
  cb->add_option("--config", b_config, "key=value config file");
  cb->add_option("--out", b_out, "Report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*ci) {
    ingest.update = expire->count() > 0;
    if (!ingest.update && ingest.input.empty()) {
      std::fprintf(stderr, "pct: ingest needs --input unless --expire-before is given\n");
      return kExitUsage;
    }
    return run_ingest(ingest);
  }
  if (*cs) return run_serve(serve);
  if (*cq) return run_query(q_server, q_input, q_timeout);
  if (*cg) return run_gen(gen);
  return report(pct_bench(b_kind.c_str(), b_config.empty() ? nullptr : b_config.c_str(), b_out.c_str()));
}
