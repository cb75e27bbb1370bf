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

#include "query/engine.hpp"

#include "common/error.hpp"
#include "embedder/preprocess.hpp"
#include "query/filters.hpp"

namespace simsearch::query {

QueryResult MakeResult(const index::EntryTable& table, const index::Neighbor& n) {
  const auto& m = table.meta(n.entry);
  QueryResult r;
  r.patch_id = m.patch_id;
  r.slide_id = m.slide_id;
  r.magnification = m.magnification;
  r.x = m.x;
  r.y = m.y;
  r.side_px = m.side_px;
  r.best_orientation = m.orientation;
  r.distance = n.distance();
  r.provenance = Provenance::kEngine;
  return r;
}

QueryEngine::QueryEngine(std::shared_ptr<const index::ShardSet> db,
                         std::shared_ptr<const embed::Embedder> embedder,
                         std::shared_ptr<const dataset::SlideStore> store)
    : db_(std::move(db)), embedder_(std::move(embedder)), store_(std::move(store)) {
  Require(db_ != nullptr && embedder_ != nullptr, ErrorCode::kInvalidArgument,
          "query engine needs a database and an embedder");
  const auto& d = embedder_->descriptor();
  const auto& h = db_->header();
  Require(d.name == h.embedder_name && d.dim == h.dim, ErrorCode::kMismatch,
          "embedder '" + d.name + "' (dim " + std::to_string(d.dim) +
              ") does not match database embedder '" + h.embedder_name + "' (dim " +
              std::to_string(h.dim) + ")");
}

Image QueryEngine::ReadQueryPixels(const RegionSource& r) const {
  Require(store_ != nullptr, ErrorCode::kState, "region queries need a slide store");
  store_->slide(r.slide_id);  // kNotFound for unknown slides
  return store_->ReadRegion(r.slide_id, r.magnification, r.x, r.y, r.w, r.h);
}

Embedding QueryEngine::EmbedQuery(const QuerySpec& spec) const {
  if (const auto* e = std::get_if<EmbeddingSource>(&spec.source)) {
    Require(static_cast<int>(e->embedding.size()) == db_->header().dim, ErrorCode::kMismatch,
            "query embedding dim " + std::to_string(e->embedding.size()) +
                " does not match database dim " + std::to_string(db_->header().dim));
    return e->embedding;
  }
  if (const auto* p = std::get_if<PixelSource>(&spec.source)) {
    return embedder_->Embed(embed::PreprocessQuery(p->pixels));
  }
  return embedder_->Embed(embed::PreprocessQuery(ReadQueryPixels(std::get<RegionSource>(spec.source))));
}

std::size_t QueryEngine::RawCandidateCount(const QuerySpec& spec) {
  // k * oversample distinct patches' worth of entries, each stored 8 times.
  return static_cast<std::size_t>(spec.k) * static_cast<std::size_t>(spec.oversample_factor) *
         kNumOrientations;
}

QueryOutcome QueryEngine::Run(const QuerySpec& spec) const {
  spec.Validate();
  const Embedding q = EmbedQuery(spec);
  auto searched = db_->SearchTimed(q, RawCandidateCount(spec));
  std::vector<QueryResult> hits;
  hits.reserve(searched.neighbors.size());
  for (const auto& n : searched.neighbors) hits.push_back(MakeResult(db_->table(), n));
  QueryOutcome out;
  out.raw_candidates = hits.size();
  out.results = FilterHits(hits, spec);
  out.exhausted = out.results.size() < static_cast<std::size_t>(spec.k);
  out.shard_ms = std::move(searched.shard_ms);
  return out;
}

}  // namespace simsearch::query
