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
#include <optional>
#include <span>
#include <vector>

#include "core_model/orientation.hpp"
#include "core_model/types.hpp"

namespace simsearch::index {

// Per-entry metadata carried in every database record.
struct EntryMeta {
  std::uint64_t patch_id = 0;
  std::uint32_t slide_id = 0;
  Magnification magnification = Magnification::k40X;
  Orientation orientation = Orientation::kR0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint16_t side_px = kDefaultPatchSide;

  friend bool operator==(const EntryMeta&, const EntryMeta&) = default;
};

// Column store of (metadata, embedding) pairs with a uniform dimension.
class EntryTable {
 public:
  explicit EntryTable(int dim = kDefaultEmbeddingDim);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return meta_.size(); }
  bool empty() const noexcept { return meta_.empty(); }

  const EntryMeta& meta(std::size_t i) const { return meta_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<EntryMeta>& metas() const noexcept { return meta_; }

  void Reserve(std::size_t n);
  // Throws on dimension mismatch or non-finite components.
  void Append(const EntryMeta& meta, std::span<const float> embedding);

  // Reorders entries by (patch_id, orientation).
  void SortCanonical();
  // Throws kFormat on a duplicate (patch_id, orientation).
  void CheckUnique() const;

  // Entries whose index satisfies `keep`, in order.
  template <typename Pred>
  EntryTable Filter(Pred keep) const {
    EntryTable out(dim_);
    for (std::size_t i = 0; i < size(); ++i) {
      if (keep(i)) out.Append(meta_[i], vector(i));
    }
    return out;
  }

  friend bool operator==(const EntryTable&, const EntryTable&) = default;

 private:
  int dim_;
  std::vector<EntryMeta> meta_;
  std::vector<float> vectors_;
};

// Squared L2 distance accumulated in double. Every search path uses this
// exact routine so that results compare bit for bit.
double SquaredL2(std::span<const float> a, std::span<const float> b);

// SquaredL2 with early exit: nullopt once the running sum exceeds `bound`.
// A completed sum is bitwise equal to SquaredL2.
std::optional<double> SquaredL2Within(std::span<const float> a, std::span<const float> b, double bound);

// A scored entry. Ordering is the canonical tie-break
// (distance, patch_id, orientation code).
struct Neighbor {
  double squared_distance = 0;
  std::uint64_t patch_id = 0;
  std::uint8_t orientation = 0;
  std::uint32_t entry = 0;  // row in the EntryTable

  double distance() const;
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
    if (a.patch_id != b.patch_id) return a.patch_id < b.patch_id;
    return a.orientation < b.orientation;
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

Neighbor Score(const EntryTable& table, std::uint32_t entry, std::span<const float> query);

}  // namespace simsearch::index
