// Copyright 2026 The simsearch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIMSEARCH_SIMSEARCH_H_
#define SIMSEARCH_SIMSEARCH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SIMSEARCH_BUILDING_LIBRARY)
#define SIMSEARCH_API __attribute__((visibility("default")))
#else
#define SIMSEARCH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status. On failure a thread-local message is
 * available from simsearch_last_error() until the next call on the same
 * thread. Strings returned through char** outputs are owned by the caller
 * and must be released with simsearch_string_free(). */
typedef enum simsearch_status {
  SIMSEARCH_OK = 0,
  SIMSEARCH_INVALID_ARGUMENT = 1,
  SIMSEARCH_NOT_FOUND = 2,
  SIMSEARCH_IO = 3,
  SIMSEARCH_FORMAT = 4,
  SIMSEARCH_MISMATCH = 5,
  SIMSEARCH_UNDERFLOW = 6,
  SIMSEARCH_STATE = 7,
  SIMSEARCH_INTERNAL = 8
} simsearch_status;

typedef struct simsearch_db simsearch_db;
typedef struct simsearch_server simsearch_server;

SIMSEARCH_API const char* simsearch_version(void);
SIMSEARCH_API const char* simsearch_status_name(simsearch_status status);
SIMSEARCH_API const char* simsearch_last_error(void);
SIMSEARCH_API void simsearch_string_free(char* s);

/* Configuration. `path` may be NULL (defaults only); `overrides_json` may be
 * NULL or a JSON object of key/value pairs applied after the file. The
 * result is the complete, validated configuration as JSON. */
SIMSEARCH_API simsearch_status simsearch_config_load(const char* path, const char* overrides_json,
                                                     char** config_json);

/* Synthetic slides + annotations from a JSON spec. */
SIMSEARCH_API simsearch_status simsearch_synth(const char* spec_json, const char* out_root,
                                               unsigned threads, char** summary_json);

/* Slide store manifest as JSON. */
SIMSEARCH_API simsearch_status simsearch_store_manifest(const char* store_root, char** manifest_json);

/* Extract, sample, embed and save a database. `config_json` holds config
 * keys (store, db, magnifications, ...). Returns the build report. */
SIMSEARCH_API simsearch_status simsearch_build(const char* config_json, char** report_json);

/* Evaluate the database's query set. `sweep_json` may be NULL or
 * {"magnifications": [...], "db_sizes": [...], "ks": [...]}. */
SIMSEARCH_API simsearch_status simsearch_eval(const char* config_json, const char* sweep_json,
                                              char** report_json);

/* Opens a database (config keys: db, store, embedder, index and query
 * parameters). The store is optional for embedding and pixel queries. */
SIMSEARCH_API simsearch_status simsearch_db_open(const char* config_json, simsearch_db** out);
SIMSEARCH_API void simsearch_db_close(simsearch_db* db);
SIMSEARCH_API simsearch_status simsearch_db_info(const simsearch_db* db, char** info_json);

/* Query with a JSON spec (region or embedding source). Unset parameters
 * take the database's configured defaults. */
SIMSEARCH_API simsearch_status simsearch_db_query(const simsearch_db* db, const char* spec_json,
                                                  char** result_json);

/* Query with raw 8-bit RGB pixels (row major, width*height*3 bytes).
 * `options_json` may be NULL or carry query parameters. */
SIMSEARCH_API simsearch_status simsearch_db_query_pixels(const simsearch_db* db, const uint8_t* rgb,
                                                         int width, int height, const char* options_json,
                                                         char** result_json);

/* Uniform random results under the same filters, deterministic per seed. */
SIMSEARCH_API simsearch_status simsearch_db_random(const simsearch_db* db, const char* spec_json,
                                                   uint64_t seed, char** result_json);

/* Writes every entry with metadata and labels as TSV. */
SIMSEARCH_API simsearch_status simsearch_export_embeddings(const simsearch_db* db, const char* out_tsv);

/* HTTP service. Config keys: db, store, listen_host, listen_port,
 * auth_token, journal, study_fraction, seed, threads. */
SIMSEARCH_API simsearch_status simsearch_server_create(const char* config_json, simsearch_server** out);
/* Binds the socket (port 0 picks a free one) and reports the port. */
SIMSEARCH_API simsearch_status simsearch_server_bind(simsearch_server* server, int* port);
/* Blocks until simsearch_server_stop() is called. */
SIMSEARCH_API simsearch_status simsearch_server_run(simsearch_server* server);
/* Thread-safe; waits for in-flight requests. */
SIMSEARCH_API simsearch_status simsearch_server_stop(simsearch_server* server);
SIMSEARCH_API void simsearch_server_destroy(simsearch_server* server);

#ifdef __cplusplus
}
#endif

#endif /* SIMSEARCH_SIMSEARCH_H_ */
