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

#include <memory>

#include "dataset/slide_store.hpp"
#include "embedder/embedder.hpp"
#include "index/shard_set.hpp"
#include "query/query_types.hpp"

namespace simsearch::query {

// Stateless query pipeline over an immutable ShardSet. Safe to call from many
// threads at once.
class QueryEngine {
 public:
  // Throws kMismatch unless the embedder's name and dim match the database.
  QueryEngine(std::shared_ptr<const index::ShardSet> db, std::shared_ptr<const embed::Embedder> embedder,
              std::shared_ptr<const dataset::SlideStore> store = nullptr);

  QueryOutcome Run(const QuerySpec& spec) const;

  // Reads and embeds the query in R0. Embedding sources pass through.
  Embedding EmbedQuery(const QuerySpec& spec) const;
  Image ReadQueryPixels(const RegionSource& region) const;

  // Number of raw entries requested from the index for a spec.
  static std::size_t RawCandidateCount(const QuerySpec& spec);

  const index::ShardSet& db() const { return *db_; }
  std::shared_ptr<const index::ShardSet> shared_db() const { return db_; }
  const embed::Embedder& embedder() const { return *embedder_; }
  const dataset::SlideStore* store() const { return store_.get(); }

 private:
  std::shared_ptr<const index::ShardSet> db_;
  std::shared_ptr<const embed::Embedder> embedder_;
  std::shared_ptr<const dataset::SlideStore> store_;
};

// Converts a neighbor into an engine result (rank unset).
QueryResult MakeResult(const index::EntryTable& table, const index::Neighbor& n);

}  // namespace simsearch::query
