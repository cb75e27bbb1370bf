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

#include <optional>
#include <vector>

#include "query/query_types.hpp"

namespace simsearch::query {

// Keeps the first hit of each patch. Input must be in canonical order, so the
// survivor is the closest orientation (lowest code on ties).
std::vector<QueryResult> DedupOrientations(const std::vector<QueryResult>& hits);

// Greedy in rank order: a hit is accepted iff its base center is at least
// min_separation_px (Euclidean) from every accepted hit on the same slide.
std::vector<QueryResult> DiversityFilter(const std::vector<QueryResult>& hits,
                                         double min_separation_px);

// True when the hit's base footprint intersects the region's.
bool Overlaps(const QueryResult& hit, const RegionSource& region);

// Drops hits the query excludes: self overlap, query slide, magnification.
std::vector<QueryResult> ApplyExclusions(const std::vector<QueryResult>& hits, const QuerySpec& spec);

// Full post-search pipeline: exclusions, dedup, diversity, truncate to k and
// renumber ranks from 1.
std::vector<QueryResult> FilterHits(const std::vector<QueryResult>& hits, const QuerySpec& spec);

// Smallest same-slide center separation among the results, or nullopt if no
// two share a slide.
std::optional<double> MinSameSlideSeparation(const std::vector<QueryResult>& results);

}  // namespace simsearch::query
