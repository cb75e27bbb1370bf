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

#include "index/shard_set.hpp"

#include <algorithm>
#include <map>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "index/brute_force.hpp"
#include "index/db_file.hpp"

namespace simsearch::index {

std::string_view ShardKindName(ShardKind kind) { return kind == ShardKind::kKd ? "kd" : "hash"; }

ShardSet ShardSet::Build(std::shared_ptr<const EntryTable> table, std::string embedder_name,
                         const IndexParams& params) {
  Require(table != nullptr, ErrorCode::kInvalidArgument, "null entry table");
  Require(params.n_shards >= 1, ErrorCode::kInvalidArgument, "n_shards must be >= 1");
  ShardSet set;
  set.table_ = std::move(table);
  set.params_ = params;
  set.header_.embedder_name = std::move(embedder_name);
  set.header_.dim = set.table_->dim();
  set.header_.total_entries = set.table_->size();

  const auto n = static_cast<std::uint64_t>(params.n_shards);
  set.shards_.resize(static_cast<std::size_t>(params.n_shards));
  std::map<std::uint64_t, std::uint32_t> first_row;
  for (std::uint32_t e = 0; e < set.table_->size(); ++e) {
    const auto& m = set.table_->meta(e);
    set.shards_[m.patch_id % n].entries.push_back(e);
    auto [it, inserted] = first_row.try_emplace(m.patch_id, e);
    if (!inserted && m.orientation < set.table_->meta(it->second).orientation) it->second = e;
  }
  for (const auto& [_, row] : first_row) set.patch_rows_.push_back(row);

  set.header_.shard_kinds.resize(set.shards_.size());
  for (std::size_t s = 0; s < set.shards_.size(); ++s) {
    set.header_.shard_entries.push_back(set.shards_[s].entries.size());
    set.header_.shard_kinds[s] = set.shards_[s].entries.size() > params.density_threshold
                                     ? ShardKind::kHash
                                     : ShardKind::kKd;
  }
  ParallelFor(set.shards_.size(), params.threads, [&](std::size_t s) {
    Shard& shard = set.shards_[s];
    if (shard.entries.empty()) return;
    if (set.header_.shard_kinds[s] == ShardKind::kHash) {
      shard.structure = HashIndex::Build(*set.table_, shard.entries, params.hash);
    } else {
      shard.structure = KdTree::Build(*set.table_, shard.entries, params.kd);
    }
  });
  return set;
}

const KdTree* ShardSet::kd(std::size_t s) const {
  return std::get_if<KdTree>(&shards_.at(s).structure);
}

const HashIndex* ShardSet::hash(std::size_t s) const {
  return std::get_if<HashIndex>(&shards_.at(s).structure);
}

std::vector<Neighbor> ShardSet::SearchShard(std::size_t s, std::span<const float> query,
                                            std::size_t m) const {
  const Shard& shard = shards_[s];
  if (const auto* tree = std::get_if<KdTree>(&shard.structure)) return tree->Search(*table_, query, m);
  if (const auto* hash = std::get_if<HashIndex>(&shard.structure)) return hash->Search(*table_, query, m);
  return {};
}

ShardedSearchResult ShardSet::SearchTimed(std::span<const float> query, std::size_t m) const {
  Require(static_cast<int>(query.size()) == header_.dim, ErrorCode::kMismatch,
          "query dimension " + std::to_string(query.size()) + " does not match database dim " +
              std::to_string(header_.dim));
  std::vector<std::vector<Neighbor>> partial(shards_.size());
  ShardedSearchResult result;
  result.shard_ms.resize(shards_.size());
  ParallelFor(shards_.size(), params_.threads, [&](std::size_t s) {
    const auto start = std::chrono::steady_clock::now();
    partial[s] = SearchShard(s, query, m);
    result.shard_ms[s] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  std::vector<Neighbor> merged;
  for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  result.neighbors = SmallestM(std::move(merged), m);
  return result;
}

std::vector<Neighbor> ShardSet::Search(std::span<const float> query, std::size_t m) const {
  return SearchTimed(query, m).neighbors;
}

StorageStats ComputeStorageStats(const EntryTable& table, const std::string& embedder_name,
                                 std::uint64_t image_bytes, int patch_side_px) {
  StorageStats s;
  s.entry_count = table.size();
  std::vector<std::uint64_t> ids;
  ids.reserve(table.size());
  for (const auto& m : table.metas()) ids.push_back(m.patch_id);
  std::sort(ids.begin(), ids.end());
  s.patch_count = static_cast<std::uint64_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  s.embedding_payload_bytes = s.entry_count * static_cast<std::uint64_t>(table.dim()) * 4;
  s.embedding_file_bytes =
      table.empty() ? 0 : DbHeaderBytes(embedder_name) + s.entry_count * DbRecordBytes(table.dim());
  s.image_bytes = image_bytes;
  s.overhead_ratio =
      image_bytes > 0 ? static_cast<double>(s.embedding_file_bytes) / static_cast<double>(image_bytes) : 0;
  s.raw_patch_bytes = static_cast<std::uint64_t>(patch_side_px) * patch_side_px * 3;
  s.embedding_bytes_per_patch = static_cast<std::uint64_t>(kNumOrientations) * table.dim() * 4;
  s.scalar_reduction = static_cast<double>(s.raw_patch_bytes) /
                       static_cast<double>(kNumOrientations * table.dim());
  s.byte_reduction =
      static_cast<double>(s.raw_patch_bytes) / static_cast<double>(s.embedding_bytes_per_patch);
  return s;
}

}  // namespace simsearch::index
