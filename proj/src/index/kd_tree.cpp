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

#include "index/kd_tree.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "index/brute_force.hpp"

namespace simsearch::index {

KdTree KdTree::Build(const EntryTable& table, std::vector<std::uint32_t> entries,
                     const KdParams& params) {
  Require(!entries.empty(), ErrorCode::kInvalidArgument, "cannot build a k-d tree from no entries");
  Require(params.max_depth >= 0 && params.leaf_target >= 1, ErrorCode::kInvalidArgument,
          "k-d tree needs max_depth >= 0 and leaf_target >= 1");
  KdTree tree;
  tree.params_ = params;
  tree.entries_ = std::move(entries);
  tree.BuildNode(table, 0, static_cast<std::uint32_t>(tree.entries_.size()), 0);
  return tree;
}

std::uint32_t KdTree::BuildNode(const EntryTable& table, std::uint32_t begin, std::uint32_t end,
                                int depth) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0, 0, 0, begin, end, depth});
  const std::uint32_t count = end - begin;
  if (count <= static_cast<std::uint32_t>(params_.leaf_target) || depth >= params_.max_depth) {
    return id;
  }

  const int dim = table.dim();
  std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto v = table.vector(entries_[i]);
    for (int d = 0; d < dim; ++d) mean[d] += v[d];
  }
  for (auto& m : mean) m /= count;
  std::vector<double> var(static_cast<std::size_t>(dim), 0.0);
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto v = table.vector(entries_[i]);
    for (int d = 0; d < dim; ++d) {
      const double diff = v[d] - mean[d];
      var[d] += diff * diff;
    }
  }
  const int split = static_cast<int>(std::max_element(var.begin(), var.end()) - var.begin());
  if (!(var[split] > 0)) return id;  // all points identical

  auto first = entries_.begin() + begin;
  auto last = entries_.begin() + end;
  std::stable_sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
    return table.vector(a)[split] < table.vector(b)[split];
  });
  auto value = [&](std::uint32_t i) { return table.vector(entries_[i])[split]; };
  float threshold = value(begin + (count - 1) / 2);
  // Left holds values <= threshold. When the lower median equals the maximum,
  // fall back to the largest value strictly below it so both sides are non-empty.
  if (value(end - 1) <= threshold) {
    std::uint32_t i = begin + (count - 1) / 2;
    while (i > begin && value(i) >= threshold) --i;
    threshold = value(i);
  }
  std::uint32_t mid = begin;
  while (mid < end && value(mid) <= threshold) ++mid;

  nodes_[id].split_dim = split;
  nodes_[id].threshold = threshold;
  const std::uint32_t left = BuildNode(table, begin, mid, depth + 1);
  const std::uint32_t right = BuildNode(table, mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::Search(const EntryTable& table, std::span<const float> query,
                                     std::size_t m) const {
  Require(static_cast<int>(query.size()) == table.dim(), ErrorCode::kMismatch,
          "query dimension does not match index dimension");
  if (m == 0 || nodes_.empty()) return {};
  TopM best(m);
  auto visit = [&](auto&& self, std::uint32_t node_id) -> void {
    const Node& node = nodes_[node_id];
    if (node.is_leaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) best.Offer(table, entries_[i], query);
      return;
    }
    const double diff = static_cast<double>(query[node.split_dim]) - node.threshold;
    const std::uint32_t near = diff <= 0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0 ? node.right : node.left;
    self(self, near);
    // Ties matter for the canonical order, so only prune strictly farther planes.
    if (!best.full() || diff * diff <= best.bound()) self(self, far);
  };
  visit(visit, 0);
  return best.Take();
}

int KdTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t KdTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

}  // namespace simsearch::index
