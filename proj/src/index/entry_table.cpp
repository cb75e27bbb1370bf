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

#include "index/entry_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"

namespace simsearch::index {

EntryTable::EntryTable(int dim) : dim_(dim) {
  Require(dim > 0, ErrorCode::kInvalidArgument, "embedding dimension must be positive");
}

void EntryTable::Reserve(std::size_t n) {
  meta_.reserve(n);
  vectors_.reserve(n * static_cast<std::size_t>(dim_));
}

void EntryTable::Append(const EntryMeta& meta, std::span<const float> embedding) {
  Require(static_cast<int>(embedding.size()) == dim_, ErrorCode::kMismatch,
          "embedding dimension " + std::to_string(embedding.size()) + " does not match table dim " +
              std::to_string(dim_));
  for (float v : embedding) {
    Require(std::isfinite(v), ErrorCode::kInvalidArgument,
            "non-finite embedding component for patch " + std::to_string(meta.patch_id));
  }
  meta_.push_back(meta);
  vectors_.insert(vectors_.end(), embedding.begin(), embedding.end());
}

void EntryTable::SortCanonical() {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (meta_[a].patch_id != meta_[b].patch_id) return meta_[a].patch_id < meta_[b].patch_id;
    return meta_[a].orientation < meta_[b].orientation;
  });
  EntryTable sorted(dim_);
  sorted.Reserve(size());
  for (auto i : order) sorted.Append(meta_[i], vector(i));
  *this = std::move(sorted);
}

void EntryTable::CheckUnique() const {
  std::vector<std::pair<std::uint64_t, int>> keys;
  keys.reserve(size());
  for (const auto& m : meta_) keys.emplace_back(m.patch_id, OrientationCode(m.orientation));
  std::sort(keys.begin(), keys.end());
  auto dup = std::adjacent_find(keys.begin(), keys.end());
  Require(dup == keys.end(), ErrorCode::kFormat,
          dup == keys.end() ? std::string()
                            : "duplicate entry for patch " + std::to_string(dup->first) +
                                  " orientation " +
                                  std::string(OrientationName(OrientationFromCode(dup->second))));
}

double SquaredL2(std::span<const float> a, std::span<const float> b) {
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum;
}

std::optional<double> SquaredL2Within(std::span<const float> a, std::span<const float> b, double bound) {
  double sum = 0;
  std::size_t i = 0;
  while (i < a.size()) {
    const std::size_t end = std::min(a.size(), i + 16);
    for (; i < end; ++i) {
      const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
      sum += d * d;
    }
    if (sum > bound) return std::nullopt;
  }
  return sum;
}

double Neighbor::distance() const { return std::sqrt(squared_distance); }

Neighbor Score(const EntryTable& table, std::uint32_t entry, std::span<const float> query) {
  const EntryMeta& m = table.meta(entry);
  return {SquaredL2(table.vector(entry), query), m.patch_id,
          static_cast<std::uint8_t>(OrientationCode(m.orientation)), entry};
}

}  // namespace simsearch::index
