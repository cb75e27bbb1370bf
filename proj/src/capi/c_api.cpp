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

#include "simsearch/simsearch.h"

#include <cstring>
#include <iostream>
#include <set>
#include <memory>
#include <string>

#include "common/config.hpp"
#include "common/error.hpp"
#include "common/json_io.hpp"
#include "dataset/extract.hpp"
#include "dataset/synth.hpp"
#include "pipeline/pipeline.hpp"
#include "query/random_results.hpp"
#include "service/server.hpp"

using simsearch::json;

struct simsearch_db {
  simsearch::Config config;
  std::shared_ptr<const simsearch::pipeline::Database> db;
  std::shared_ptr<const simsearch::dataset::SlideStore> store;
  std::unique_ptr<simsearch::query::QueryEngine> engine;
};

struct simsearch_server {
  std::unique_ptr<simsearch::service::Server> server;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
simsearch_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SIMSEARCH_OK;
  } catch (const simsearch::Error& e) {
    g_last_error = e.what();
    return static_cast<simsearch_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return SIMSEARCH_INVALID_ARGUMENT;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return SIMSEARCH_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SIMSEARCH_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SIMSEARCH_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SIMSEARCH_INTERNAL;
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Out(char** dst, const json& j) {
  simsearch::Require(dst != nullptr, simsearch::ErrorCode::kInvalidArgument, "null output pointer");
  *dst = Dup(j.dump());
}

json Parse(const char* text, const char* what) {
  if (text == nullptr) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    simsearch::Fail(simsearch::ErrorCode::kInvalidArgument, std::string(what) + " is not valid JSON");
  }
}

void NotNull(const void* p, const char* what) {
  simsearch::Require(p != nullptr, simsearch::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

simsearch::Config ConfigFrom(const char* config_json) {
  simsearch::Config c;
  const json j = Parse(config_json, "config");
  simsearch::Require(j.is_object(), simsearch::ErrorCode::kInvalidArgument, "config must be a JSON object");
  simsearch::ApplyConfigJson(c, j);
  return c;
}

// Spec JSON with unset parameters filled from the configured defaults.
json WithDefaults(const simsearch::Config& c, json spec) {
  simsearch::Require(spec.is_object(), simsearch::ErrorCode::kInvalidArgument, "query spec must be a JSON object");
  if (!spec.contains("k")) spec["k"] = c.k;
  if (!spec.contains("oversample_factor")) spec["oversample_factor"] = c.oversample;
  if (!spec.contains("min_separation_px")) spec["min_separation_px"] = c.min_separation;
  if (!spec.contains("exclude_self")) spec["exclude_self"] = c.exclude_self;
  if (!spec.contains("exclude_query_slide")) spec["exclude_query_slide"] = c.exclude_query_slide;
  return spec;
}

}  // namespace

extern "C" {

const char* simsearch_version(void) { return "1.0.0"; }

const char* simsearch_status_name(simsearch_status status) {
  switch (status) {
    case SIMSEARCH_OK: return "ok";
    case SIMSEARCH_INVALID_ARGUMENT: return "invalid_argument";
    case SIMSEARCH_NOT_FOUND: return "not_found";
    case SIMSEARCH_IO: return "io";
    case SIMSEARCH_FORMAT: return "format";
    case SIMSEARCH_MISMATCH: return "mismatch";
    case SIMSEARCH_UNDERFLOW: return "underflow";
    case SIMSEARCH_STATE: return "state";
    case SIMSEARCH_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* simsearch_last_error(void) { return g_last_error.c_str(); }

void simsearch_string_free(char* s) { std::free(s); }

simsearch_status simsearch_config_load(const char* path, const char* overrides_json, char** config_json) {
  return Guard([&] {
    simsearch::Config c = path != nullptr ? simsearch::LoadConfig(path) : simsearch::Config{};
    if (overrides_json != nullptr) simsearch::ApplyConfigJson(c, Parse(overrides_json, "config overrides"));
    c.Validate();
    Out(config_json, simsearch::ToJson(c));
  });
}

simsearch_status simsearch_synth(const char* spec_json, const char* out_root, unsigned threads,
                                 char** summary_json) {
  return Guard([&] {
    NotNull(spec_json, "spec");
    NotNull(out_root, "output root");
    const auto spec = simsearch::dataset::SynthSpecFromJson(Parse(spec_json, "synth spec"));
    const auto out = simsearch::dataset::GenerateSynthetic(spec, out_root, threads);
    std::set<std::string> labels;
    for (const auto& a : out.annotations) labels.insert(a.label);
    if (summary_json != nullptr) {
      Out(summary_json, {{"slides", out.slides.size()},
                         {"annotations", out.annotations.size()},
                         {"labels", labels},
                         {"seed", spec.seed}});
    }
  });
}

simsearch_status simsearch_store_manifest(const char* store_root, char** manifest_json) {
  return Guard([&] {
    NotNull(store_root, "store root");
    const auto store = simsearch::dataset::SlideStore::Open(store_root);
    Out(manifest_json, simsearch::dataset::SlideStore::ManifestJson(store.slides()));
  });
}

simsearch_status simsearch_build(const char* config_json, char** report_json) {
  return Guard([&] {
    const auto summary = simsearch::pipeline::BuildDatabase(ConfigFrom(config_json));
    if (report_json != nullptr) Out(report_json, summary.report);
  });
}

simsearch_status simsearch_eval(const char* config_json, const char* sweep_json, char** report_json) {
  return Guard([&] {
    const auto config = ConfigFrom(config_json);
    std::optional<simsearch::eval::SweepGrid> grid;
    if (sweep_json != nullptr) {
      const json j = Parse(sweep_json, "sweep");
      simsearch::eval::SweepGrid g;
      for (const auto& m : j.value("magnifications", json::array())) {
        g.magnifications.push_back(simsearch::ParseMagnification(m.get<std::string>()));
      }
      g.db_sizes = j.value("db_sizes", std::vector<std::size_t>{});
      g.ks = j.value("ks", std::vector<int>{config.k});
      grid = g;
    }
    const auto outcome = simsearch::pipeline::Evaluate(config, grid ? &*grid : nullptr);
    if (report_json != nullptr) Out(report_json, outcome.report);
  });
}

simsearch_status simsearch_db_open(const char* config_json, simsearch_db** out) {
  return Guard([&] {
    NotNull(out, "output handle");
    *out = nullptr;
    auto handle = std::make_unique<simsearch_db>();
    handle->config = ConfigFrom(config_json);
    const auto& c = handle->config;
    simsearch::Require(!c.db.empty(), simsearch::ErrorCode::kInvalidArgument, "config lacks 'db'");
    handle->db = std::make_shared<const simsearch::pipeline::Database>(
        simsearch::pipeline::OpenDatabase(c.db, simsearch::pipeline::IndexParamsFrom(c)));
    if (!c.store.empty()) {
      handle->store = std::make_shared<const simsearch::dataset::SlideStore>(
          simsearch::dataset::SlideStore::Open(c.store));
    }
    std::shared_ptr<const simsearch::embed::Embedder> embedder = simsearch::embed::MakeEmbedder(c.embedder);
    handle->engine = std::make_unique<simsearch::query::QueryEngine>(handle->db->shards, embedder, handle->store);
    *out = handle.release();
  });
}

void simsearch_db_close(simsearch_db* db) { delete db; }

simsearch_status simsearch_db_info(const simsearch_db* db, char** info_json) {
  return Guard([&] {
    NotNull(db, "db handle");
    const auto& set = *db->db->shards;
    const auto& h = set.header();
    json kinds = json::array();
    for (auto k : h.shard_kinds) kinds.push_back(simsearch::index::ShardKindName(k));
    const auto stats = simsearch::index::ComputeStorageStats(
        set.table(), h.embedder_name, db->store ? db->store->ImageBytes() : 0, db->config.side_px);
    Out(info_json, {{"embedder", h.embedder_name},
                    {"dim", h.dim},
                    {"entries", h.total_entries},
                    {"patches", set.patch_rows().size()},
                    {"labeled_patches", db->db->labels.size()},
                    {"shard_entries", h.shard_entries},
                    {"shard_kinds", kinds},
                    {"embedding_file_bytes", stats.embedding_file_bytes},
                    {"image_bytes", stats.image_bytes},
                    {"overhead_ratio", stats.overhead_ratio},
                    {"embedding_bytes_per_patch", stats.embedding_bytes_per_patch},
                    {"scalar_reduction", stats.scalar_reduction}});
  });
}

simsearch_status simsearch_db_query(const simsearch_db* db, const char* spec_json, char** result_json) {
  return Guard([&] {
    NotNull(db, "db handle");
    NotNull(spec_json, "query spec");
    const auto spec = simsearch::query::QuerySpecFromJson(WithDefaults(db->config, Parse(spec_json, "query spec")));
    Out(result_json, simsearch::pipeline::OutcomeJson(db->engine->Run(spec), *db->db));
  });
}

simsearch_status simsearch_db_query_pixels(const simsearch_db* db, const uint8_t* rgb, int width, int height,
                                           const char* options_json, char** result_json) {
  return Guard([&] {
    NotNull(db, "db handle");
    NotNull(rgb, "pixel buffer");
    simsearch::Require(width > 0 && height > 0, simsearch::ErrorCode::kInvalidArgument,
                       "image dimensions must be positive");
    json options = WithDefaults(db->config, Parse(options_json, "query options"));
    // Parse parameters through a placeholder embedding source, then swap in the pixels.
    options["embedding"] = json::array({0.0});
    auto spec = simsearch::query::QuerySpecFromJson(options);
    simsearch::Image img(width, height);
    std::memcpy(img.mutable_data().data(), rgb, static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    spec.source = simsearch::query::PixelSource{std::move(img)};
    Out(result_json, simsearch::pipeline::OutcomeJson(db->engine->Run(spec), *db->db));
  });
}

simsearch_status simsearch_db_random(const simsearch_db* db, const char* spec_json, uint64_t seed,
                                     char** result_json) {
  return Guard([&] {
    NotNull(db, "db handle");
    json j = WithDefaults(db->config, Parse(spec_json, "query spec"));
    if (!j.contains("slide_id") && !j.contains("embedding")) j["embedding"] = json::array({0.0});
    const auto spec = simsearch::query::QuerySpecFromJson(j);
    simsearch::query::QueryOutcome outcome;
    outcome.results = simsearch::query::RandomResults(*db->db->shards, spec, seed);
    Out(result_json, simsearch::pipeline::OutcomeJson(outcome, *db->db));
  });
}

simsearch_status simsearch_export_embeddings(const simsearch_db* db, const char* out_tsv) {
  return Guard([&] {
    NotNull(db, "db handle");
    NotNull(out_tsv, "output path");
    simsearch::pipeline::ExportEmbeddingsTsv(*db->db, out_tsv);
  });
}

simsearch_status simsearch_server_create(const char* config_json, simsearch_server** out) {
  return Guard([&] {
    NotNull(out, "output handle");
    *out = nullptr;
    const auto c = ConfigFrom(config_json);
    simsearch::Require(!c.db.empty() && !c.store.empty(), simsearch::ErrorCode::kInvalidArgument,
                       "server config needs 'db' and 'store'");
    auto db = std::make_shared<const simsearch::pipeline::Database>(
        simsearch::pipeline::OpenDatabase(c.db, simsearch::pipeline::IndexParamsFrom(c)));
    auto store = std::make_shared<const simsearch::dataset::SlideStore>(simsearch::dataset::SlideStore::Open(c.store));
    std::vector<simsearch::PatchRecord> pool;
    if (std::filesystem::exists(simsearch::pipeline::QueriesPath(c.db))) {
      pool = simsearch::dataset::ReadPatchTable(simsearch::pipeline::QueriesPath(c.db));
    }
    simsearch::service::ServerOptions options;
    options.host = c.listen_host;
    options.port = c.listen_port;
    options.auth_token = c.auth_token;
    options.study.random_fraction = c.study_fraction;
    options.study.seed = c.seed;
    options.study.journal = c.journal;
    options.request_log = &std::cerr;
    auto handle = std::make_unique<simsearch_server>();
    handle->server = std::make_unique<simsearch::service::Server>(
        options, db, store, simsearch::embed::MakeEmbedder(c.embedder), std::move(pool));
    *out = handle.release();
  });
}

simsearch_status simsearch_server_bind(simsearch_server* server, int* port) {
  return Guard([&] {
    NotNull(server, "server handle");
    const int p = server->server->Bind();
    if (port != nullptr) *port = p;
  });
}

simsearch_status simsearch_server_run(simsearch_server* server) {
  return Guard([&] {
    NotNull(server, "server handle");
    server->server->Run();
  });
}

simsearch_status simsearch_server_stop(simsearch_server* server) {
  return Guard([&] {
    NotNull(server, "server handle");
    server->server->Stop();
  });
}

void simsearch_server_destroy(simsearch_server* server) { delete server; }

}  // extern "C"
