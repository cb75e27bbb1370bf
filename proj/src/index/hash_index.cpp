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

#include "index/hash_index.hpp"

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "index/brute_force.hpp"

namespace simsearch::index {

HashIndex HashIndex::Build(const EntryTable& table, std::vector<std::uint32_t> entries,
                           const HashParams& params) {
  Require(params.bits >= 1 && params.bits <= 32, ErrorCode::kInvalidArgument,
          "hash bits must be in [1, 32]");
  Require(params.probe_radius >= 0, ErrorCode::kInvalidArgument, "probe radius must be >= 0");
  HashIndex index;
  index.params_ = params;
  index.dim_ = table.dim();
  index.planes_.resize(static_cast<std::size_t>(params.bits) * index.dim_);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int b = 0; b < params.bits; ++b) {
    std::vector<double> row(static_cast<std::size_t>(index.dim_));
    double norm = 0;
    for (auto& v : row) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (int d = 0; d < index.dim_; ++d) {
      index.planes_[static_cast<std::size_t>(b) * index.dim_ + d] = static_cast<float>(row[d] / norm);
    }
  }
  for (auto e : entries) index.buckets_[index.Key(table.vector(e))].push_back(e);
  index.size_ = entries.size();
  index.all_ = std::move(entries);
  return index;
}

std::uint32_t HashIndex::Key(std::span<const float> v) const {
  Require(static_cast<int>(v.size()) == dim_, ErrorCode::kMismatch,
          "query dimension does not match index dimension");
  std::uint32_t key = 0;
  for (int b = 0; b < params_.bits; ++b) {
    const float* plane = &planes_[static_cast<std::size_t>(b) * dim_];
    double dot = 0;
    for (int d = 0; d < dim_; ++d) dot += static_cast<double>(plane[d]) * v[d];
    if (dot >= 0) key |= (1u << b);
  }
  return key;
}

std::vector<Neighbor> HashIndex::Search(const EntryTable& table, std::span<const float> query,
                                        std::size_t m) const {
  return Search(table, query, m, params_.probe_radius);
}

std::vector<Neighbor> HashIndex::Search(const EntryTable& table, std::span<const float> query,
                                        std::size_t m, int probe_radius) const {
  const std::uint32_t key = Key(query);
  if (probe_radius >= params_.bits) return BruteForceSearch(table, all_, query, m);

  TopM best(m);
  auto scan = [&](std::uint32_t k) {
    auto it = buckets_.find(k);
    if (it == buckets_.end()) return;
    for (auto e : it->second) best.Offer(table, e, query);
  };
  // Enumerate keys at Hamming distance 0..radius by flipping increasing bit sets.
  auto flip = [&](auto&& self, std::uint32_t k, int start, int remaining) -> void {
    scan(k);
    if (remaining == 0) return;
    for (int b = start; b < params_.bits; ++b) self(self, k ^ (1u << b), b + 1, remaining - 1);
  };
  flip(flip, key, 0, probe_radius);
  return best.Take();
}

}  // namespace simsearch::index
