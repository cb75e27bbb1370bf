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

#include "eval/sweep.hpp"

#include <algorithm>
#include <sstream>

#include "common/error.hpp"

namespace simsearch::eval {

std::vector<SweepPoint> ExpandGrid(const SweepGrid& grid) {
  Require(!grid.ks.empty(), ErrorCode::kInvalidArgument, "sweep needs at least one k");
  std::vector<std::optional<Magnification>> mags(grid.magnifications.begin(), grid.magnifications.end());
  if (mags.empty()) mags.push_back(std::nullopt);
  std::vector<std::size_t> sizes_sorted = grid.db_sizes;
  std::sort(sizes_sorted.begin(), sizes_sorted.end());
  std::vector<std::optional<std::size_t>> sizes(sizes_sorted.begin(), sizes_sorted.end());
  if (sizes.empty()) sizes.push_back(std::nullopt);
  std::vector<int> ks = grid.ks;
  std::sort(ks.begin(), ks.end());
  std::vector<SweepPoint> out;
  for (const auto& m : mags) {
    for (const auto& s : sizes) {
      for (int k : ks) {
        Require(k >= 1, ErrorCode::kInvalidArgument, "sweep k must be >= 1");
        out.push_back({m, s, k});
      }
    }
  }
  return out;
}

std::vector<SweepEntry> RunSweep(const SweepGrid& grid,
                                 const std::function<EvalReport(const SweepPoint&)>& evaluate) {
  std::vector<SweepEntry> out;
  for (const auto& p : ExpandGrid(grid)) {
    SweepEntry e{p, evaluate(p)};
    e.report.config["sweep_point"] = ToJson(p);
    out.push_back(std::move(e));
  }
  return out;
}

json ToJson(const SweepPoint& p) {
  return {{"magnification", p.magnification ? json(MagnificationName(*p.magnification)) : json(nullptr)},
          {"db_size", p.db_size ? json(*p.db_size) : json(nullptr)},
          {"k", p.k}};
}

std::string SweepTsv(const std::vector<SweepEntry>& entries) {
  std::ostringstream out;
  out.precision(10);
  out << "magnification\tdb_size\tk\ttop_k_score\tmean_match\trank_weighted\n";
  for (const auto& e : entries) {
    out << (e.point.magnification ? std::string(MagnificationName(*e.point.magnification)) : "-") << '\t'
        << (e.point.db_size ? std::to_string(*e.point.db_size) : "-") << '\t' << e.point.k << '\t';
    auto it = e.report.top_k_scores.find(e.point.k);
    if (it != e.report.top_k_scores.end()) {
      out << it->second;
    } else {
      out << '-';
    }
    out << '\t' << e.report.mean_match << '\t' << e.report.rank_weighted << '\n';
  }
  return out.str();
}

}  // namespace simsearch::eval
