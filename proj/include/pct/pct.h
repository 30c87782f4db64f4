/* Copyright 2026 The PCT Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef PCT_PCT_H_
#define PCT_PCT_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PCT_API __declspec(dllexport)
#else
#define PCT_API __attribute__((visibility("default")))
#endif

typedef enum pct_status {
  PCT_OK = 0,
  PCT_ERR_INVALID_INPUT = 1,
  PCT_ERR_PARSE = 2,
  PCT_ERR_OUT_OF_PERIOD = 3,
  PCT_ERR_ORDERING = 4,
  PCT_ERR_FORMAT = 5,
  PCT_ERR_INTEGRITY = 6,
  PCT_ERR_IO = 7,
  PCT_ERR_CONFIG = 8,
  PCT_ERR_BUDGET_EXCEEDED = 9,
  PCT_ERR_LOGIC = 10,
  PCT_ERR_PROTOCOL = 11,
  PCT_ERR_SEALED = 12,
  PCT_ERR_SESSION_EXPIRED = 13,
  PCT_ERR_HANDSHAKE = 14,
  PCT_ERR_TRANSPORT = 15,
  PCT_ERR_INTERNAL = 99
} pct_status;

typedef enum pct_backend { PCT_BACKEND_FSA = 0, PCT_BACKEND_HASH = 1 } pct_backend;
typedef enum pct_paging_mode { PCT_PAGING_STRICT = 0, PCT_PAGING_PENALIZED = 1 } pct_paging_mode;
typedef enum pct_model { PCT_MODEL_WALK = 0, PCT_MODEL_UNIFORM = 1 } pct_model;

/* Message of the last failed call on this thread; never NULL. */
PCT_API const char* pct_last_error(void);
PCT_API const char* pct_status_name(pct_status status);
PCT_API const char* pct_version(void);

typedef struct pct_theta {
  int32_t geo_digits;
  int64_t period_start;
  int64_t period_end;
  int64_t segment_seconds;
  int32_t time_width;
} pct_theta;

/* Writes the key (geo_digits + time_width chars plus NUL) into out. */
PCT_API pct_status pct_encode_point(const pct_theta* theta, int64_t t, double lat, double lon, char* out,
                                    size_t out_size);

/* ---- Dictionaries ------------------------------------------------------ */

typedef struct pct_dict pct_dict;

/* keys: `count` strictly increasing keys of `key_length` bytes each, packed. */
PCT_API pct_status pct_dict_build(pct_backend backend, const char* keys, size_t count, size_t key_length,
                                  pct_dict** out);
PCT_API pct_status pct_dict_load(const uint8_t* bytes, size_t size, pct_dict** out);
PCT_API pct_status pct_dict_load_file(const char* path, pct_dict** out);
PCT_API int pct_dict_contains(const pct_dict* dict, const char* key, size_t key_size);
PCT_API size_t pct_dict_key_count(const pct_dict* dict);
PCT_API size_t pct_dict_serialized_bytes(const pct_dict* dict);
/* Copies up to `capacity` bytes; *written receives the full size. */
PCT_API pct_status pct_dict_serialize(const pct_dict* dict, uint8_t* out, size_t capacity, size_t* written);
PCT_API void pct_dict_free(pct_dict* dict);

/* ---- Corpus ingest ----------------------------------------------------- */

typedef struct pct_ingest_options {
  const char* input_csv;
  const char* out_dir;
  pct_theta theta;
  uint64_t chunk_entries;
  pct_backend backend;
  const char* tmp_dir; /* NULL: out_dir */
  uint64_t run_keys;   /* 0: default */
} pct_ingest_options;

typedef struct pct_ingest_stats {
  uint64_t points;
  uint64_t dropped_out_of_period;
  uint64_t unique_keys;
  uint64_t chunks;
  uint64_t total_bytes;
  uint64_t max_chunk_bytes;
  uint64_t generation;
} pct_ingest_stats;

PCT_API pct_status pct_ingest(const pct_ingest_options* options, pct_ingest_stats* stats);

/* Rebuilds the corpus in out_dir from its retained keys plus input_csv
 * (may be NULL), dropping keys whose segment ends at or before expire_before. */
PCT_API pct_status pct_update(const pct_ingest_options* options, int64_t expire_before, pct_ingest_stats* stats);

/* ---- Synthetic data ---------------------------------------------------- */

typedef struct pct_gen_options {
  uint64_t people;
  uint64_t points;
  pct_model model;
  uint64_t seed;
  double lat0, lon0, lat1, lon1;
  const char* out_dir;
} pct_gen_options;

/* Fills defaults matching the built-in generator configuration. */
PCT_API void pct_gen_options_init(pct_gen_options* options);
PCT_API pct_status pct_generate(const pct_gen_options* options);

/* ---- Server ------------------------------------------------------------ */

typedef struct pct_server pct_server;

typedef struct pct_server_options {
  const char* manifest_dir;
  const char* listen; /* host:port; port 0 picks a free port */
  uint64_t batch_count;
  int64_t batch_wait_ms;
  uint64_t budget_bytes;
  pct_paging_mode paging_mode;
  uint64_t penalty_ns_per_byte;
  int64_t session_ttl_seconds;
  int range_pruning;
  const char* admin_socket; /* NULL: no admin channel */
  int quiet;                /* nonzero: no log lines on stderr */
} pct_server_options;

PCT_API void pct_server_options_init(pct_server_options* options);
PCT_API pct_status pct_server_start(const pct_server_options* options, pct_server** out);
PCT_API uint16_t pct_server_port(const pct_server* server);
/* Swap in the manifest on disk before the next batch. */
PCT_API void pct_server_reload(pct_server* server);
PCT_API void pct_server_stop(pct_server* server);
PCT_API void pct_server_free(pct_server* server);

/* ---- Client ------------------------------------------------------------ */

typedef struct pct_query_result {
  int contact;
  int rejected;
  uint32_t matched_count;
  int64_t timestamp;
  uint64_t keys_sent;
  uint64_t dropped_out_of_period;
  pct_theta theta;
} pct_query_result;

PCT_API pct_status pct_query(const char* server, const char* input_csv, int timeout_ms, pct_query_result* result);

/* ---- Benchmarks -------------------------------------------------------- */

/* kind: "compression" or "psi". Writes a CSV report with a schema header. */
PCT_API pct_status pct_bench(const char* kind, const char* config_path, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* PCT_PCT_H_ */
