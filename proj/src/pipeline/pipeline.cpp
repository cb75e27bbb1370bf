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

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/parallel.hpp"
#include "dataset/annotations.hpp"
#include "dataset/extract.hpp"
#include "embedder/embedder.hpp"
#include "index/db_file.hpp"
#include "query/random_results.hpp"

namespace simsearch::pipeline {

namespace fs = std::filesystem;

fs::path LabelsPath(const fs::path& db) { return fs::path(db.string() + ".labels.ndjson"); }
fs::path QueriesPath(const fs::path& db) { return fs::path(db.string() + ".queries.ndjson"); }
fs::path BuildReportPath(const fs::path& db) { return fs::path(db.string() + ".report.json"); }

index::IndexParams IndexParamsFrom(const Config& c) {
  index::IndexParams p;
  p.n_shards = c.n_shards;
  p.density_threshold = static_cast<std::size_t>(c.density_threshold);
  p.kd.leaf_target = c.leaf_target;
  p.kd.max_depth = c.max_depth;
  p.hash.bits = c.hash_bits;
  p.hash.probe_radius = c.probe_radius;
  p.hash.seed = c.seed;
  p.threads = ResolveThreads(static_cast<std::size_t>(c.threads));
  return p;
}

query::QuerySpec QueryDefaultsFrom(const Config& c) {
  query::QuerySpec s;
  s.k = c.k;
  s.oversample_factor = c.oversample;
  s.min_separation_px = c.min_separation;
  s.exclude_self = c.exclude_self;
  s.exclude_query_slide = c.exclude_query_slide;
  return s;
}

std::vector<std::uint32_t> SplitQuerySlides(const std::vector<SlideRef>& slides, double fraction,
                                            std::uint64_t seed) {
  std::vector<std::uint32_t> ids;
  for (const auto& s : slides) ids.push_back(s.slide_id);
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed ^ 0x5157u);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(ids[i - 1], ids[pick(rng)]);
  }
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
  std::vector<std::uint32_t> out(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, ids.size())));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

json CountsJson(const std::vector<PatchRecord>& patches, dataset::ClassAxis axis) {
  json by_class = json::object();
  for (const auto& [c, n] : dataset::ClassHistogram(patches, axis)) by_class[c] = n;
  std::map<std::string, std::size_t> mags;
  for (const auto& p : patches) ++mags[std::string(MagnificationName(p.magnification))];
  json by_mag = json::object();
  for (const auto& [m, n] : mags) by_mag[m] = n;
  return {{"total", patches.size()}, {"by_class", by_class}, {"by_magnification", by_mag}};
}

json StatsJson(const index::StorageStats& s) {
  return {{"entry_count", s.entry_count},
          {"patch_count", s.patch_count},
          {"embedding_payload_bytes", s.embedding_payload_bytes},
          {"embedding_file_bytes", s.embedding_file_bytes},
          {"image_bytes", s.image_bytes},
          {"overhead_ratio", s.overhead_ratio},
          {"raw_patch_bytes", s.raw_patch_bytes},
          {"embedding_bytes_per_patch", s.embedding_bytes_per_patch},
          {"scalar_reduction", s.scalar_reduction},
          {"byte_reduction", s.byte_reduction}};
}

}  // namespace

BuildSummary BuildDatabase(const Config& config) {
  config.Validate();
  Require(!config.store.empty(), ErrorCode::kInvalidArgument, "build needs a store path");
  Require(!config.db.empty(), ErrorCode::kInvalidArgument, "build needs a db output path");
  const std::size_t threads = ResolveThreads(static_cast<std::size_t>(config.threads));
  const auto store = dataset::SlideStore::Open(config.store);
  const fs::path ann_path =
      config.annotations.empty() ? fs::path(config.store) / "annotations.json" : fs::path(config.annotations);
  const auto annotations = dataset::ReadAnnotations(ann_path);
  Require(!annotations.empty(), ErrorCode::kInvalidArgument, "annotation file has no regions");
  const auto embedder = embed::MakeEmbedder(config.embedder);
  const auto axis = dataset::ParseClassAxis(config.class_axis);

  dataset::ExtractOptions ex;
  ex.magnifications.clear();
  for (const auto& m : config.magnifications) ex.magnifications.push_back(ParseMagnification(m));
  ex.side_px = config.side_px;
  ex.stride_px = config.stride_px;
  ex.coverage_threshold = config.coverage_threshold;
  ex.keep_unlabeled = config.keep_unlabeled;
  ex.threads = threads;
  const auto patches = dataset::ExtractPatches(store, annotations, ex);

  const auto query_slides = SplitQuerySlides(store.slides(), config.query_slide_fraction, config.seed);
  const std::set<std::uint32_t> qset(query_slides.begin(), query_slides.end());
  std::vector<PatchRecord> db_candidates;
  std::vector<PatchRecord> query_candidates;
  for (const auto& p : patches) {
    if (qset.count(p.slide_id)) {
      if (dataset::PrimaryClass(p.labels, axis)) query_candidates.push_back(p);
    } else if (config.keep_unlabeled || dataset::PrimaryClass(p.labels, axis)) {
      db_candidates.push_back(p);
    }
  }
  const auto db_patches =
      config.db_per_class > 0
          ? dataset::SampleBalanced(db_candidates, static_cast<std::size_t>(config.db_per_class), axis,
                                    config.seed)
          : db_candidates;
  const auto query_patches =
      config.queries_per_class > 0
          ? dataset::SampleBalanced(query_candidates, static_cast<std::size_t>(config.queries_per_class),
                                    axis, config.seed + 1)
          : query_candidates;
  Require(!db_patches.empty(), ErrorCode::kUnderflow, "no database patches after extraction");

  std::vector<embed::OrientedEmbeddingSet> sets(db_patches.size());
  ParallelFor(db_patches.size(), threads, [&](std::size_t i) {
    const auto& p = db_patches[i];
    const Image img = store.ReadRegion(p.slide_id, p.magnification, p.x, p.y, p.side_px, p.side_px);
    sets[i] = embed::EmbedAllOrientations(img, *embedder, p.patch_id);
  });
  index::EntryTable table(embedder->descriptor().dim);
  table.Reserve(db_patches.size() * kNumOrientations);
  for (std::size_t i = 0; i < db_patches.size(); ++i) {
    const auto& p = db_patches[i];
    for (Orientation o : kAllOrientations) {
      index::EntryMeta m{p.patch_id,
                         p.slide_id,
                         p.magnification,
                         o,
                         static_cast<std::uint32_t>(p.x),
                         static_cast<std::uint32_t>(p.y),
                         static_cast<std::uint16_t>(p.side_px)};
      table.Append(m, sets[i].embeddings[static_cast<std::size_t>(OrientationCode(o))]);
    }
  }
  table.SortCanonical();
  const fs::path db_path(config.db);
  if (db_path.has_parent_path()) fs::create_directories(db_path.parent_path());
  index::SaveDb(db_path, embedder->descriptor().name, table);
  dataset::WritePatchTable(LabelsPath(db_path), db_patches);
  dataset::WritePatchTable(QueriesPath(db_path), query_patches);

  const auto stats =
      index::ComputeStorageStats(table, embedder->descriptor().name, store.ImageBytes(), config.side_px);
  BuildSummary s;
  s.db_patches = db_patches.size();
  s.query_patches = query_patches.size();
  s.entries = table.size();
  s.query_slides = query_slides;
  s.report = {{"seed", config.seed},
              {"embedder", embedder->descriptor().name},
              {"dim", embedder->descriptor().dim},
              {"class_axis", config.class_axis},
              {"magnifications", config.magnifications},
              {"extracted_patches", patches.size()},
              {"query_slides", query_slides},
              {"database", CountsJson(db_patches, axis)},
              {"queries", CountsJson(query_patches, axis)},
              {"entries", table.size()},
              {"storage", StatsJson(stats)}};
  WriteFileAtomic(BuildReportPath(db_path), eval::DumpReport(s.report));
  return s;
}

const PatchRecord* Database::Find(std::uint64_t patch_id) const {
  auto it = labels.find(patch_id);
  return it == labels.end() ? nullptr : &it->second;
}

Database OpenDatabase(const fs::path& path, const index::IndexParams& params,
                      const std::optional<std::string>& expected_embedder) {
  auto loaded = index::LoadDb(path, std::nullopt, expected_embedder);
  Database db;
  db.path = path.string();
  auto table = std::make_shared<const index::EntryTable>(std::move(loaded.table));
  db.shards = std::make_shared<const index::ShardSet>(
      index::ShardSet::Build(table, loaded.header.embedder_name, params));
  if (fs::exists(LabelsPath(path))) {
    for (auto& p : dataset::ReadPatchTable(LabelsPath(path))) db.labels.emplace(p.patch_id, std::move(p));
  }
  return db;
}

json OutcomeJson(const query::QueryOutcome& outcome, const Database& db, bool include_provenance) {
  json j = query::ToJson(outcome, include_provenance);
  for (auto& r : j["results"]) {
    r["thumbnail_url"] = "/api/v1/patch/" + std::to_string(r["patch_id"].get<std::uint64_t>()) + ".png";
    if (const auto* p = db.Find(r["patch_id"].get<std::uint64_t>())) r["labels"] = ToJson(p->labels);
  }
  return j;
}

eval::RetrievalRun RunRetrieval(const query::QueryEngine& engine, const Database& db,
                                const std::vector<PatchRecord>& queries,
                                const query::QuerySpec& defaults, bool random_arm, std::uint64_t seed,
                                std::size_t threads) {
  eval::RetrievalRun run;
  run.queries.resize(queries.size());
  ParallelFor(queries.size(), threads, [&](std::size_t i) {
    const auto& q = queries[i];
    query::QuerySpec spec = defaults;
    spec.source = query::RegionSource{q.slide_id, q.x, q.y, q.side_px, q.side_px, q.magnification};
    std::vector<query::QueryResult> results;
    bool exhausted = false;
    if (random_arm) {
      results = query::RandomResults(engine.db(), spec, seed + i);
    } else {
      auto outcome = engine.Run(spec);
      results = std::move(outcome.results);
      exhausted = outcome.exhausted;
    }
    auto& rq = run.queries[i];
    rq.query = q;
    rq.exhausted = exhausted;
    for (const auto& r : results) {
      const PatchRecord* p = db.Find(r.patch_id);
      Require(p != nullptr, ErrorCode::kFormat,
              "result patch " + std::to_string(r.patch_id) + " missing from the label sidecar");
      rq.results.push_back(*p);
    }
  });
  return run;
}

namespace {

std::vector<PatchRecord> ReadQueries(const fs::path& db_path) {
  Require(fs::exists(QueriesPath(db_path)), ErrorCode::kNotFound,
          "query sidecar not found: " + QueriesPath(db_path).string());
  return dataset::ReadPatchTable(QueriesPath(db_path));
}

eval::EvalReport Score(const eval::RetrievalRun& run, const eval::EvalOptions& options) {
  return eval::Evaluate(run, options);
}

}  // namespace

EvalOutcome Evaluate(const Config& config, const eval::SweepGrid* sweep) {
  config.Validate();
  Require(!config.db.empty(), ErrorCode::kInvalidArgument, "eval needs a db path");
  Require(!config.store.empty(), ErrorCode::kInvalidArgument, "eval needs a store path");
  const std::size_t threads = ResolveThreads(static_cast<std::size_t>(config.threads));
  const auto params = IndexParamsFrom(config);
  const Database db = OpenDatabase(config.db, params, config.embedder);
  Require(!db.labels.empty(), ErrorCode::kNotFound, "label sidecar missing or empty for " + config.db);
  const auto queries = ReadQueries(config.db);
  Require(!queries.empty(), ErrorCode::kUnderflow, "no evaluation queries");
  auto store = std::make_shared<const dataset::SlideStore>(dataset::SlideStore::Open(config.store));
  std::shared_ptr<const embed::Embedder> embedder = embed::MakeEmbedder(config.embedder);

  eval::EvalOptions options;
  options.k = config.k;
  options.axis = eval::ParseLabelAxis(config.eval_axis);
  options.mode = eval::ParseMatchMode(config.match_mode);
  query::QuerySpec defaults = QueryDefaultsFrom(config);
  // Results are retrieved up to rank 10 so the top-k curve is complete; the
  // greedy filters make the first k identical to a run with k itself.
  defaults.k = std::max(config.k, 10);

  auto evaluate_on = [&](const Database& subset, const std::vector<PatchRecord>& qs, int k,
                         json config_json) {
    query::QueryEngine engine(subset.shards, embedder, store);
    eval::EvalOptions o = options;
    o.k = k;
    query::QuerySpec d = defaults;
    d.k = std::max(k, 10);
    const auto engine_run = RunRetrieval(engine, subset, qs, d, false, config.seed, threads);
    EvalOutcome out;
    out.engine = Score(engine_run, o);
    out.engine.config = config_json;
    out.engine.config["arm"] = "engine";
    if (config.random_baseline) {
      const auto random_run = RunRetrieval(engine, subset, qs, d, true, config.seed, threads);
      out.random = Score(random_run, o);
      out.random->config = config_json;
      out.random->config["arm"] = "random";
      auto test = eval::ChiSquared2x2(out.engine.hits, out.engine.queries, out.random->hits,
                                      out.random->queries);
      test.name = "engine_vs_random_top" + std::to_string(k);
      out.engine.tests.push_back(test);
    }
    return out;
  };

  json base_config = {{"seed", config.seed},
                      {"embedder", config.embedder},
                      {"db", fs::path(config.db).filename().string()},
                      {"db_entries", db.shards->table().size()},
                      {"db_patches", db.labels.size()},
                      {"queries", queries.size()},
                      {"k", config.k},
                      {"axis", config.eval_axis},
                      {"match_mode", config.match_mode},
                      {"min_separation", config.min_separation},
                      {"oversample", config.oversample},
                      {"n_shards", config.n_shards}};
  EvalOutcome result = evaluate_on(db, queries, config.k, base_config);

  if (sweep != nullptr) {
    const auto class_axis = dataset::ParseClassAxis(config.class_axis);
    std::vector<PatchRecord> db_patches;
    for (const auto& [_, p] : db.labels) db_patches.push_back(p);
    result.sweep = eval::RunSweep(*sweep, [&](const eval::SweepPoint& point) {
      std::vector<PatchRecord> keep = db_patches;
      std::vector<PatchRecord> qs = queries;
      if (point.magnification) {
        std::erase_if(keep, [&](const PatchRecord& p) { return p.magnification != *point.magnification; });
        std::erase_if(qs, [&](const PatchRecord& p) { return p.magnification != *point.magnification; });
      }
      if (point.db_size) keep = dataset::SampleBalanced(keep, *point.db_size, class_axis, config.seed);
      std::set<std::uint64_t> ids;
      for (const auto& p : keep) ids.insert(p.patch_id);
      Database subset;
      subset.path = db.path;
      for (const auto& p : keep) subset.labels.emplace(p.patch_id, p);
      auto table = std::make_shared<const index::EntryTable>(db.shards->table().Filter(
          [&](std::size_t i) { return ids.count(db.shards->table().meta(i).patch_id) > 0; }));
      Require(!table->empty() && !qs.empty(), ErrorCode::kUnderflow, "sweep point has no data");
      subset.shards = std::make_shared<const index::ShardSet>(
          index::ShardSet::Build(table, db.shards->header().embedder_name, params));
      json cfg = base_config;
      cfg["db_patches"] = keep.size();
      cfg["db_entries"] = table->size();
      cfg["queries"] = qs.size();
      return evaluate_on(subset, qs, point.k, cfg).engine;
    });
  }

  json sweep_json = json::array();
  for (const auto& e : result.sweep) sweep_json.push_back({{"point", eval::ToJson(e.point)}, {"report", eval::ToJson(e.report)}});
  result.report = {{"seed", config.seed},
                   {"engine", eval::ToJson(result.engine)},
                   {"random", result.random ? eval::ToJson(*result.random) : json(nullptr)},
                   {"tests", eval::ToJson(result.engine)["tests"]},
                   {"sweep", sweep_json}};
  if (!config.reports.empty()) {
    const fs::path dir(config.reports);
    fs::create_directories(dir);
    WriteFileAtomic(dir / "eval_report.json", eval::DumpReport(result.report));
    WriteFileAtomic(dir / "confusion.csv", eval::ConfusionCsv(result.engine.confusion));
    if (result.random) WriteFileAtomic(dir / "confusion_random.csv", eval::ConfusionCsv(result.random->confusion));
    if (!result.sweep.empty()) WriteFileAtomic(dir / "sweep.tsv", eval::SweepTsv(result.sweep));
  }
  return result;
}

void ExportEmbeddingsTsv(const Database& db, const fs::path& out_path) {
  const auto& table = db.shards->table();
  std::ostringstream out;
  out << "patch_id\tslide_id\tmagnification\torientation\tx\ty\tside_px\tfeatures\torgan\tgleason";
  for (int d = 0; d < table.dim(); ++d) out << "\te" << d;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& m = table.meta(i);
    std::string features, organ, gleason;
    if (const auto* p = db.Find(m.patch_id)) {
      for (const auto& f : p->labels.histologic_features) features += (features.empty() ? "" : ";") + f;
      if (p->labels.organ) organ = *p->labels.organ;
      if (p->labels.gleason) gleason = GleasonName(*p->labels.gleason);
    }
    out << m.patch_id << '\t' << m.slide_id << '\t' << MagnificationName(m.magnification) << '\t'
        << OrientationName(m.orientation) << '\t' << m.x << '\t' << m.y << '\t' << m.side_px << '\t'
        << features << '\t' << organ << '\t' << gleason;
    for (float v : table.vector(i)) {
      // Shortest representation that round-trips exactly.
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
  WriteFileAtomic(out_path, out.str());
}

index::EntryTable ReadEmbeddingsTsv(const fs::path& path) {
  std::istringstream in(ReadTextFile(path));
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kFormat, "empty embeddings TSV");
  constexpr int kMetaColumns = 10;
  int dim = 0;
  {
    std::istringstream h(line);
    std::string col;
    int n = 0;
    while (std::getline(h, col, '\t')) ++n;
    dim = n - kMetaColumns;
    Require(dim > 0, ErrorCode::kFormat, "embeddings TSV header has no embedding columns");
  }
  index::EntryTable table(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    Require(static_cast<int>(cols.size()) == kMetaColumns + dim, ErrorCode::kFormat,
            "embeddings TSV line " + std::to_string(line_no) + " has the wrong column count");
    try {
      index::EntryMeta m;
      m.patch_id = std::stoull(cols[0]);
      m.slide_id = static_cast<std::uint32_t>(std::stoul(cols[1]));
      m.magnification = ParseMagnification(cols[2]);
      auto o = ParseOrientation(cols[3]);
      Require(o.has_value(), ErrorCode::kFormat, "bad orientation '" + cols[3] + "'");
      m.orientation = *o;
      m.x = static_cast<std::uint32_t>(std::stoul(cols[4]));
      m.y = static_cast<std::uint32_t>(std::stoul(cols[5]));
      m.side_px = static_cast<std::uint16_t>(std::stoul(cols[6]));
      std::vector<float> v(static_cast<std::size_t>(dim));
      for (int d = 0; d < dim; ++d) {
        const auto& s = cols[static_cast<std::size_t>(kMetaColumns + d)];
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[static_cast<std::size_t>(d)]);
        Require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::kFormat, "bad float '" + s + "'");
      }
      table.Append(m, v);
    } catch (const std::logic_error&) {
      Fail(ErrorCode::kFormat, "embeddings TSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  return table;
}

}  // namespace simsearch::pipeline
