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
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core_model/types.hpp"

namespace simsearch::dataset {

enum class LabelKind { kHistologicFeature, kOrgan, kGleason };
std::string_view LabelKindName(LabelKind kind);
LabelKind ParseLabelKind(std::string_view name);

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct AnnotationRegion {
  std::uint32_t slide_id = 0;
  std::string label;
  LabelKind kind = LabelKind::kHistologicFeature;
  std::vector<Point> polygon;  // base pixels

  // At least 3 vertices, inside the slide, no self-intersections.
  void Validate(const SlideRef& slide) const;
};

bool IsSimplePolygon(const std::vector<Point>& polygon);

// Even-odd rule, ray cast towards +x. Used as the reference definition of
// "inside" for coverage: a pixel is covered when its center is inside.
bool PointInPolygon(const std::vector<Point>& polygon, double x, double y);

// Half-open [begin, end) spans of x along the horizontal line through `y`
// that lie inside the polygon, using the same rule as PointInPolygon.
std::vector<std::pair<double, double>> ScanlineSpans(const std::vector<Point>& polygon, double y);

// Number of level pixels of the square window (base origin x, y; side
// `side_px` level pixels; downsample `ds`) whose centers lie inside the union
// of `polygons`.
std::int64_t CoveredPixels(const std::vector<const std::vector<Point>*>& polygons, std::int64_t x,
                           std::int64_t y, int side_px, int ds);

std::vector<AnnotationRegion> ReadAnnotations(const std::filesystem::path& path);
void WriteAnnotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRegion>& regions);
json ToJson(const AnnotationRegion& region);

}  // namespace simsearch::dataset
