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

#include "index/brute_force.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace simsearch::index {

void TopM::Offer(const EntryTable& table, std::uint32_t entry, std::span<const float> query) {
  if (m_ == 0) return;
  if (!full()) {
    heap_.push(Score(table, entry, query));
    return;
  }
  const auto d = SquaredL2Within(table.vector(entry), query, bound());
  if (!d) return;
  const EntryMeta& meta = table.meta(entry);
  const Neighbor n{*d, meta.patch_id, static_cast<std::uint8_t>(OrientationCode(meta.orientation)), entry};
  if (n < heap_.top()) {
    heap_.pop();
    heap_.push(n);
  }
}

std::vector<Neighbor> TopM::Take() {
  std::vector<Neighbor> out(heap_.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap_.top();
    heap_.pop();
  }
  return out;
}

std::vector<Neighbor> SmallestM(std::vector<Neighbor> candidates, std::size_t m) {
  if (candidates.size() > m) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(m),
                      candidates.end());
    candidates.resize(m);
  } else {
    std::sort(candidates.begin(), candidates.end());
  }
  return candidates;
}

std::vector<Neighbor> BruteForceSearch(const EntryTable& table, std::span<const std::uint32_t> entries,
                                       std::span<const float> query, std::size_t m) {
  Require(static_cast<int>(query.size()) == table.dim(), ErrorCode::kMismatch,
          "query dimension does not match index dimension");
  std::vector<Neighbor> all;
  all.reserve(entries.size());
  for (auto e : entries) all.push_back(Score(table, e, query));
  return SmallestM(std::move(all), m);
}

std::vector<Neighbor> BruteForceSearch(const EntryTable& table, std::span<const float> query,
                                       std::size_t m) {
  Require(static_cast<int>(query.size()) == table.dim(), ErrorCode::kMismatch,
          "query dimension does not match index dimension");
  std::vector<Neighbor> all;
  all.reserve(table.size());
  for (std::uint32_t e = 0; e < table.size(); ++e) all.push_back(Score(table, e, query));
  return SmallestM(std::move(all), m);
}

}  // namespace simsearch::index
