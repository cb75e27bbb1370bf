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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "dataset/sampling.hpp"
#include "dataset/slide_store.hpp"
#include "eval/report.hpp"
#include "eval/sweep.hpp"
#include "index/shard_set.hpp"
#include "query/engine.hpp"

namespace simsearch::pipeline {

// Sidecar files written next to a database file.
std::filesystem::path LabelsPath(const std::filesystem::path& db);
std::filesystem::path QueriesPath(const std::filesystem::path& db);
std::filesystem::path BuildReportPath(const std::filesystem::path& db);

index::IndexParams IndexParamsFrom(const Config& config);
query::QuerySpec QueryDefaultsFrom(const Config& config);

struct BuildSummary {
  std::size_t db_patches = 0;
  std::size_t query_patches = 0;
  std::size_t entries = 0;
  std::vector<std::uint32_t> query_slides;
  json report;
};

// Extract, split by slide, balance, embed all orientations and save the
// database with its label and query sidecars and a JSON build report.
BuildSummary BuildDatabase(const Config& config);

// Slides reserved for queries: a seeded shuffle of slide ids, first
// round(fraction * n) of them, kept sorted.
std::vector<std::uint32_t> SplitQuerySlides(const std::vector<SlideRef>& slides, double fraction,
                                            std::uint64_t seed);

// A loaded database with its index and (optional) label sidecar.
struct Database {
  std::string path;
  std::shared_ptr<const index::ShardSet> shards;
  std::map<std::uint64_t, PatchRecord> labels;  // empty when no sidecar exists

  const PatchRecord* Find(std::uint64_t patch_id) const;
};

Database OpenDatabase(const std::filesystem::path& path, const index::IndexParams& params,
                      const std::optional<std::string>& expected_embedder = std::nullopt);

// Query outcome as JSON, with labels attached when the database has them.
json OutcomeJson(const query::QueryOutcome& outcome, const Database& db, bool include_provenance = true);

struct EvalOutcome {
  eval::EvalReport engine;
  std::optional<eval::EvalReport> random;
  std::vector<eval::SweepEntry> sweep;
  json report;  // everything above plus config and seed
};

// Runs every query of the database's query sidecar through the engine (and
// the random baseline when enabled), scores both and compares them with a
// chi-squared test. Writes eval_report.json, confusion.csv and, for sweeps,
// sweep.tsv into config.reports when set.
EvalOutcome Evaluate(const Config& config, const eval::SweepGrid* sweep = nullptr);

// Retrieval run of the engine or random arm over the given queries and
// database subset.
eval::RetrievalRun RunRetrieval(const query::QueryEngine& engine, const Database& db,
                                const std::vector<PatchRecord>& queries, const query::QuerySpec& defaults,
                                bool random_arm, std::uint64_t seed, std::size_t threads);

// Embeddings plus metadata as TSV: patch_id, slide_id, magnification,
// orientation, x, y, side_px, features, organ, gleason, e0..e{dim-1}.
void ExportEmbeddingsTsv(const Database& db, const std::filesystem::path& out);
index::EntryTable ReadEmbeddingsTsv(const std::filesystem::path& path);

}  // namespace simsearch::pipeline
