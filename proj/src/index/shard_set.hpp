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

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "index/entry_table.hpp"
#include "index/hash_index.hpp"
#include "index/kd_tree.hpp"

namespace simsearch::index {

struct IndexParams {
  int n_shards = 1;
  // Shards holding more entries than this use the hash index instead of the
  // k-d tree.
  std::size_t density_threshold = 100000;
  KdParams kd;
  HashParams hash;
  std::size_t threads = 1;  // per-query shard fan-out
};

enum class ShardKind { kKd, kHash };
std::string_view ShardKindName(ShardKind kind);

struct ShardSetHeader {
  std::string embedder_name;
  int dim = 0;
  std::size_t total_entries = 0;
  std::vector<std::size_t> shard_entries;
  std::vector<ShardKind> shard_kinds;
};

struct ShardedSearchResult {
  std::vector<Neighbor> neighbors;
  std::vector<double> shard_ms;
};

// Immutable set of shards over one EntryTable. Entry e lives in shard
// patch_id(e) mod n_shards. Safe for concurrent searches once built.
class ShardSet {
 public:
  static ShardSet Build(std::shared_ptr<const EntryTable> table, std::string embedder_name,
                        const IndexParams& params = {});

  // Per-shard search followed by a canonical-order merge.
  std::vector<Neighbor> Search(std::span<const float> query, std::size_t m) const;
  ShardedSearchResult SearchTimed(std::span<const float> query, std::size_t m) const;

  const EntryTable& table() const { return *table_; }
  std::shared_ptr<const EntryTable> shared_table() const { return table_; }
  const ShardSetHeader& header() const { return header_; }
  const IndexParams& params() const { return params_; }
  std::size_t shard_count() const { return shards_.size(); }
  ShardKind shard_kind(std::size_t s) const { return header_.shard_kinds[s]; }
  const std::vector<std::uint32_t>& shard_entries(std::size_t s) const { return shards_[s].entries; }
  const KdTree* kd(std::size_t s) const;
  const HashIndex* hash(std::size_t s) const;

  // One entry row per distinct patch (its lowest orientation), by patch_id.
  const std::vector<std::uint32_t>& patch_rows() const { return patch_rows_; }

 private:
  struct Shard {
    std::vector<std::uint32_t> entries;
    std::variant<std::monostate, KdTree, HashIndex> structure;
  };

  std::vector<Neighbor> SearchShard(std::size_t s, std::span<const float> query, std::size_t m) const;

  std::shared_ptr<const EntryTable> table_;
  IndexParams params_;
  ShardSetHeader header_;
  std::vector<Shard> shards_;
  std::vector<std::uint32_t> patch_rows_;
};

struct StorageStats {
  std::uint64_t entry_count = 0;
  std::uint64_t patch_count = 0;
  std::uint64_t embedding_payload_bytes = 0;  // count * dim * 4
  std::uint64_t embedding_file_bytes = 0;     // header + records
  std::uint64_t image_bytes = 0;              // tile files in the store
  double overhead_ratio = 0;                  // embedding_file_bytes / image_bytes
  std::uint64_t raw_patch_bytes = 0;          // side * side * 3 for one patch
  std::uint64_t embedding_bytes_per_patch = 0;
  double scalar_reduction = 0;  // raw patch scalars / embedding scalars per patch
  double byte_reduction = 0;    // raw patch bytes / embedding bytes per patch
};

StorageStats ComputeStorageStats(const EntryTable& table, const std::string& embedder_name,
                                 std::uint64_t image_bytes, int patch_side_px);

}  // namespace simsearch::index
