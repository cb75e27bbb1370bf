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
#include <vector>

#include "index/entry_table.hpp"

namespace simsearch::index {

struct KdParams {
  int max_depth = 6;
  int leaf_target = 40;
};

// Depth-limited k-d tree. Nodes split on the highest-variance dimension at
// the lower median; nodes at max_depth become leaves regardless of size and
// are scanned linearly. Search backtracks fully, so results are exact.
class KdTree {
 public:
  struct Node {
    int split_dim = -1;  // -1 for leaves
    float threshold = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t begin = 0;  // leaf range into entries()
    std::uint32_t end = 0;
    int depth = 0;
    bool is_leaf() const { return split_dim < 0; }
  };

  // `entries` are rows of `table`; their order is the tie-break for
  // equal split values, so builds are deterministic for a fixed input order.
  static KdTree Build(const EntryTable& table, std::vector<std::uint32_t> entries,
                      const KdParams& params = {});

  std::vector<Neighbor> Search(const EntryTable& table, std::span<const float> query,
                               std::size_t m) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  int depth() const;
  std::size_t leaf_count() const;
  const KdParams& params() const { return params_; }

 private:
  std::uint32_t BuildNode(const EntryTable& table, std::uint32_t begin, std::uint32_t end, int depth);

  KdParams params_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> entries_;
};

}  // namespace simsearch::index
