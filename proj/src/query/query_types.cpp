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

#include "query/query_types.hpp"

#include <cmath>

#include "common/error.hpp"
#include "embedder/preprocess.hpp"

namespace simsearch::query {

void QuerySpec::Validate() const {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  Require(k <= 1000, ErrorCode::kInvalidArgument, "k must be <= 1000");
  Require(oversample_factor >= 1 && oversample_factor <= 1000, ErrorCode::kInvalidArgument,
          "oversample_factor must be in 1..1000");
  Require(std::isfinite(min_separation_px) && min_separation_px >= 0, ErrorCode::kInvalidArgument,
          "min_separation_px must be a finite value >= 0");
  auto check_region = [](const RegionSource& r) {
    Require(r.w >= embed::kMinQuerySide && r.w <= embed::kMaxQuerySide &&
                r.h >= embed::kMinQuerySide && r.h <= embed::kMaxQuerySide,
            ErrorCode::kInvalidArgument,
            "query region must be between 200 and 400 pixels in width and height (got " +
                std::to_string(r.w) + "x" + std::to_string(r.h) + ")");
    Require(r.x >= 0 && r.y >= 0, ErrorCode::kInvalidArgument, "region origin must be non-negative");
  };
  if (const auto* r = std::get_if<RegionSource>(&source)) check_region(*r);
  if (const auto* p = std::get_if<PixelSource>(&source)) {
    const int w = p->pixels.width();
    const int h = p->pixels.height();
    Require(w >= embed::kMinQuerySide && w <= embed::kMaxQuerySide && h >= embed::kMinQuerySide &&
                h <= embed::kMaxQuerySide,
            ErrorCode::kInvalidArgument,
            "query image must be between 200 and 400 pixels in width and height (got " +
                std::to_string(w) + "x" + std::to_string(h) + ")");
  }
  if (const auto* e = std::get_if<EmbeddingSource>(&source)) {
    Require(!e->embedding.empty(), ErrorCode::kInvalidArgument, "empty query embedding");
    for (float v : e->embedding) {
      Require(std::isfinite(v), ErrorCode::kInvalidArgument, "query embedding is not finite");
    }
  }
}

std::optional<RegionSource> QuerySpec::origin() const {
  if (const auto* r = std::get_if<RegionSource>(&source)) return *r;
  if (const auto* e = std::get_if<EmbeddingSource>(&source)) return e->origin;
  return std::nullopt;
}

std::string_view ProvenanceName(Provenance p) { return p == Provenance::kEngine ? "engine" : "random"; }

json ToJson(const QueryResult& r, bool include_provenance) {
  json j = {{"rank", r.rank},
            {"patch_id", r.patch_id},
            {"slide_id", r.slide_id},
            {"magnification", MagnificationName(r.magnification)},
            {"x", r.x},
            {"y", r.y},
            {"side_px", r.side_px},
            {"best_orientation", OrientationName(r.best_orientation)}};
  j["distance"] = r.distance ? json(*r.distance) : json(nullptr);
  if (include_provenance) j["provenance"] = ProvenanceName(r.provenance);
  return j;
}

json ToJson(const QueryOutcome& o, bool include_provenance) {
  json results = json::array();
  for (const auto& r : o.results) results.push_back(ToJson(r, include_provenance));
  return {{"results", results}, {"exhausted", o.exhausted}, {"raw_candidates", o.raw_candidates}};
}

namespace {

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kInvalidArgument, std::string("invalid value for '") + key + "'");
  }
}

}  // namespace

QuerySpec QuerySpecFromJson(const json& j) {
  Require(j.is_object(), ErrorCode::kInvalidArgument, "query spec must be a JSON object");
  static const char* kKnown[] = {"slide_id",          "x",
                                 "y",                 "w",
                                 "h",                 "magnification",
                                 "embedding",         "k",
                                 "oversample_factor", "min_separation_px",
                                 "exclude_self",      "exclude_query_slide",
                                 "restrict_magnification"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    Require(known, ErrorCode::kInvalidArgument, "unknown query field '" + key + "'");
  }
  QuerySpec spec;
  auto region = [&] {
    RegionSource r;
    Require(j.contains("slide_id") && j.contains("x") && j.contains("y") && j.contains("w") &&
                j.contains("h"),
            ErrorCode::kInvalidArgument, "region query needs slide_id, x, y, w and h");
    r.slide_id = Get<std::uint32_t>(j, "slide_id", 0);
    r.x = Get<std::int64_t>(j, "x", 0);
    r.y = Get<std::int64_t>(j, "y", 0);
    r.w = Get<int>(j, "w", 0);
    r.h = Get<int>(j, "h", 0);
    try {
      r.magnification = ParseMagnification(Get<std::string>(j, "magnification", "40X"));
    } catch (const Error& e) {
      Fail(ErrorCode::kInvalidArgument, e.what());
    }
    return r;
  };
  if (j.contains("embedding")) {
    EmbeddingSource e;
    e.embedding = Get<std::vector<float>>(j, "embedding", {});
    if (j.contains("slide_id")) e.origin = region();
    spec.source = std::move(e);
  } else {
    spec.source = region();
  }
  spec.k = Get<int>(j, "k", spec.k);
  spec.oversample_factor = Get<int>(j, "oversample_factor", spec.oversample_factor);
  spec.min_separation_px = Get<double>(j, "min_separation_px", spec.min_separation_px);
  spec.exclude_self = Get<bool>(j, "exclude_self", spec.exclude_self);
  spec.exclude_query_slide = Get<bool>(j, "exclude_query_slide", spec.exclude_query_slide);
  if (j.contains("restrict_magnification") && !j.at("restrict_magnification").is_null()) {
    try {
      spec.restrict_magnification =
          ParseMagnification(Get<std::string>(j, "restrict_magnification", ""));
    } catch (const Error& e) {
      Fail(ErrorCode::kInvalidArgument, e.what());
    }
  }
  spec.Validate();
  return spec;
}

}  // namespace simsearch::query
