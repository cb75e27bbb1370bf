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

#include "query/filters.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

namespace simsearch::query {
namespace {

std::pair<double, double> Center(const QueryResult& r) {
  return BaseCenter(r.x, r.y, r.side_px, r.magnification);
}

double CenterDistance(const QueryResult& a, const QueryResult& b) {
  const auto [ax, ay] = Center(a);
  const auto [bx, by] = Center(b);
  return std::hypot(ax - bx, ay - by);
}

}  // namespace

std::vector<QueryResult> DedupOrientations(const std::vector<QueryResult>& hits) {
  std::unordered_set<std::uint64_t> seen;
  std::vector<QueryResult> out;
  for (const auto& h : hits) {
    if (seen.insert(h.patch_id).second) out.push_back(h);
  }
  return out;
}

std::vector<QueryResult> DiversityFilter(const std::vector<QueryResult>& hits,
                                         double min_separation_px) {
  std::map<std::uint32_t, std::vector<const QueryResult*>> accepted;
  std::vector<QueryResult> out;
  for (const auto& h : hits) {
    auto& same_slide = accepted[h.slide_id];
    bool ok = true;
    for (const QueryResult* a : same_slide) {
      if (CenterDistance(h, *a) < min_separation_px) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    out.push_back(h);
    same_slide.push_back(&h);
  }
  return out;
}

bool Overlaps(const QueryResult& hit, const RegionSource& region) {
  if (hit.slide_id != region.slide_id) return false;
  const std::int64_t hs = static_cast<std::int64_t>(hit.side_px) * Downsample(hit.magnification);
  const std::int64_t ds = Downsample(region.magnification);
  const std::int64_t rw = region.w * ds;
  const std::int64_t rh = region.h * ds;
  return hit.x < region.x + rw && region.x < hit.x + hs && hit.y < region.y + rh &&
         region.y < hit.y + hs;
}

std::vector<QueryResult> ApplyExclusions(const std::vector<QueryResult>& hits, const QuerySpec& spec) {
  const auto origin = spec.origin();
  std::vector<QueryResult> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    if (spec.restrict_magnification && h.magnification != *spec.restrict_magnification) continue;
    if (origin) {
      if (spec.exclude_query_slide && h.slide_id == origin->slide_id) continue;
      if (spec.exclude_self && Overlaps(h, *origin)) continue;
    }
    out.push_back(h);
  }
  return out;
}

std::vector<QueryResult> FilterHits(const std::vector<QueryResult>& hits, const QuerySpec& spec) {
  auto out = DiversityFilter(DedupOrientations(ApplyExclusions(hits, spec)), spec.min_separation_px);
  if (out.size() > static_cast<std::size_t>(spec.k)) out.resize(static_cast<std::size_t>(spec.k));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

std::optional<double> MinSameSlideSeparation(const std::vector<QueryResult>& results) {
  std::optional<double> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      if (results[i].slide_id != results[j].slide_id) continue;
      const double d = CenterDistance(results[i], results[j]);
      if (!best || d < *best) best = d;
    }
  }
  return best;
}

}  // namespace simsearch::query
