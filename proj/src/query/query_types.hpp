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
#include <string>
#include <variant>
#include <vector>

#include "core_model/image.hpp"
#include "core_model/orientation.hpp"
#include "core_model/types.hpp"

namespace simsearch::query {

// A rectangle of w x h level pixels at `magnification`; (x, y) in base pixels.
struct RegionSource {
  std::uint32_t slide_id = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  int w = 0;
  int h = 0;
  Magnification magnification = Magnification::k40X;
};

struct PixelSource {
  Image pixels;
};

// Precomputed query embedding; skips reading and embedding.
struct EmbeddingSource {
  Embedding embedding;
  // Optional location so that exclude_self and exclude_query_slide apply.
  std::optional<RegionSource> origin;
};

struct QuerySpec {
  std::variant<RegionSource, PixelSource, EmbeddingSource> source;
  int k = 5;
  int oversample_factor = 5;
  double min_separation_px = 1000.0;  // base pixels
  bool exclude_self = true;
  bool exclude_query_slide = false;
  // Keep only hits at this magnification.
  std::optional<Magnification> restrict_magnification;

  // Throws kInvalidArgument on bad parameters or a region outside 200..400 px.
  void Validate() const;
  // The query's own footprint, when known.
  std::optional<RegionSource> origin() const;
};

enum class Provenance : std::uint8_t { kEngine = 0, kRandom = 1 };
std::string_view ProvenanceName(Provenance p);

struct QueryResult {
  int rank = 0;
  std::uint64_t patch_id = 0;
  std::uint32_t slide_id = 0;
  Magnification magnification = Magnification::k40X;
  std::int64_t x = 0;
  std::int64_t y = 0;
  int side_px = kDefaultPatchSide;
  Orientation best_orientation = Orientation::kR0;
  std::optional<double> distance;  // unset for random results
  Provenance provenance = Provenance::kEngine;

  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

struct QueryOutcome {
  std::vector<QueryResult> results;
  // Set when fewer than k results survived filtering.
  bool exhausted = false;
  std::size_t raw_candidates = 0;
  std::vector<double> shard_ms;

  friend bool operator==(const QueryOutcome& a, const QueryOutcome& b) {
    return a.results == b.results && a.exhausted == b.exhausted &&
           a.raw_candidates == b.raw_candidates;
  }
};

json ToJson(const QueryResult& r, bool include_provenance = true);
json ToJson(const QueryOutcome& o, bool include_provenance = true);
// Parses the JSON body accepted by the query endpoint and the C API:
//   {"slide_id", "x", "y", "w", "h", "magnification"} or {"embedding": [...]},
//   plus optional "k", "oversample_factor", "min_separation_px",
//   "exclude_self", "exclude_query_slide", "restrict_magnification".
QuerySpec QuerySpecFromJson(const json& j);

}  // namespace simsearch::query
