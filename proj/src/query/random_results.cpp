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

#include "query/random_results.hpp"

#include <random>
#include <unordered_map>

#include "common/error.hpp"
#include "query/engine.hpp"
#include "query/filters.hpp"

namespace simsearch::query {

std::vector<QueryResult> RandomResults(const index::ShardSet& db, const QuerySpec& spec,
                                       std::uint64_t seed) {
  spec.Validate();
  const auto& rows = db.patch_rows();
  Require(!rows.empty(), ErrorCode::kUnderflow, "database is empty");
  std::mt19937_64 rng(seed);
  // Lazy Fisher-Yates: only touched positions are stored, so each draw is O(1).
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  const auto k = static_cast<std::size_t>(spec.k);
  std::vector<QueryResult> accepted;
  for (std::size_t i = 0; i < rows.size() && accepted.size() < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    const std::size_t j = pick(rng);
    const std::size_t chosen = at(j);
    swapped[j] = at(i);

    QueryResult r = MakeResult(db.table(), index::Neighbor{0, 0, 0, rows[chosen]});
    r.best_orientation = Orientation::kR0;
    r.distance.reset();
    r.provenance = Provenance::kRandom;
    if (ApplyExclusions({r}, spec).empty()) continue;
    accepted.push_back(r);
    if (DiversityFilter(accepted, spec.min_separation_px).size() != accepted.size()) {
      accepted.pop_back();
    }
  }
  Require(accepted.size() == k, ErrorCode::kUnderflow,
          "only " + std::to_string(accepted.size()) + " patches available after filtering, need " +
              std::to_string(k));
  for (std::size_t i = 0; i < accepted.size(); ++i) accepted[i].rank = static_cast<int>(i + 1);
  return accepted;
}

}  // namespace simsearch::query
