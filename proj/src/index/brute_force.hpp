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

#include <queue>
#include <span>
#include <vector>

#include "index/entry_table.hpp"

namespace simsearch::index {

// Exhaustive scan over `entries` (all rows when empty); the ground truth for
// every other search structure. Returns min(m, n) neighbors in canonical order.
std::vector<Neighbor> BruteForceSearch(const EntryTable& table, std::span<const std::uint32_t> entries,
                                       std::span<const float> query, std::size_t m);
std::vector<Neighbor> BruteForceSearch(const EntryTable& table, std::span<const float> query,
                                       std::size_t m);

// Running selection of the m best neighbors in canonical order. Entries whose
// partial distance already exceeds the current worst are dropped unscored;
// equal distances are always scored so ties resolve canonically.
class TopM {
 public:
  explicit TopM(std::size_t m) : m_(m) {}
  void Offer(const EntryTable& table, std::uint32_t entry, std::span<const float> query);
  bool full() const { return heap_.size() >= m_; }
  // Squared distance of the current worst kept neighbor; only valid when full().
  double bound() const { return heap_.top().squared_distance; }
  // Sorted best-first; leaves the selection empty.
  std::vector<Neighbor> Take();

 private:
  std::size_t m_;
  std::priority_queue<Neighbor> heap_;  // top() is the worst kept
};

// Keeps the m smallest neighbors in canonical order.
std::vector<Neighbor> SmallestM(std::vector<Neighbor> candidates, std::size_t m);

}  // namespace simsearch::index
