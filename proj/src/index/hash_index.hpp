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

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "index/entry_table.hpp"

namespace simsearch::index {

struct HashParams {
  int bits = 16;          // number of random hyperplanes, 1..32
  int probe_radius = 1;   // Hamming radius of probed buckets
  std::uint64_t seed = 0;
};

// Random-hyperplane LSH. Each entry lands in the bucket keyed by the signs of
// its projections; search re-ranks every entry in buckets within
// `probe_radius` of the query key by exact L2. Approximate unless the radius
// reaches `bits`.
class HashIndex {
 public:
  static HashIndex Build(const EntryTable& table, std::vector<std::uint32_t> entries,
                         const HashParams& params = {});

  std::uint32_t Key(std::span<const float> v) const;
  std::vector<Neighbor> Search(const EntryTable& table, std::span<const float> query,
                               std::size_t m) const;
  std::vector<Neighbor> Search(const EntryTable& table, std::span<const float> query,
                               std::size_t m, int probe_radius) const;

  std::size_t size() const { return size_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  const HashParams& params() const { return params_; }
  const std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>& buckets() const {
    return buckets_;
  }

 private:
  HashParams params_;
  int dim_ = 0;
  std::vector<float> planes_;  // bits x dim, unit rows
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> buckets_;
  std::vector<std::uint32_t> all_;  // every entry, for full-radius scans
  std::size_t size_ = 0;
};

}  // namespace simsearch::index
