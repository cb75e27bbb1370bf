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

#include "dataset/annotations.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/json_io.hpp"

namespace simsearch::dataset {

std::string_view LabelKindName(LabelKind kind) {
  switch (kind) {
    case LabelKind::kHistologicFeature: return "histologic_feature";
    case LabelKind::kOrgan: return "organ";
    case LabelKind::kGleason: return "gleason";
  }
  return "?";
}

LabelKind ParseLabelKind(std::string_view name) {
  for (auto k : {LabelKind::kHistologicFeature, LabelKind::kOrgan, LabelKind::kGleason}) {
    if (LabelKindName(k) == name) return k;
  }
  Fail(ErrorCode::kFormat, "unknown label_kind '" + std::string(name) + "'");
}

namespace {

double Cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool OnSegment(const Point& p, const Point& a, const Point& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool SegmentsIntersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = Cross(c, d, a);
  const double d2 = Cross(c, d, b);
  const double d3 = Cross(a, b, c);
  const double d4 = Cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && OnSegment(a, c, d)) || (d2 == 0 && OnSegment(b, c, d)) ||
         (d3 == 0 && OnSegment(c, a, b)) || (d4 == 0 && OnSegment(d, a, b));
}

// x of the crossing between edge (a, b) and the line through y, if the edge
// straddles it under the half-open rule a.y <= y < b.y (or reversed).
bool EdgeCrossing(const Point& a, const Point& b, double y, double* x) {
  if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
    *x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
    return true;
  }
  return false;
}

}  // namespace

bool IsSimplePolygon(const std::vector<Point>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (SegmentsIntersect(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool PointInPolygon(const std::vector<Point>& polygon, double x, double y) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    double cx = 0;
    if (EdgeCrossing(polygon[i], polygon[(i + 1) % n], y, &cx) && cx > x) inside = !inside;
  }
  return inside;
}

std::vector<std::pair<double, double>> ScanlineSpans(const std::vector<Point>& polygon, double y) {
  std::vector<double> xs;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    double cx = 0;
    if (EdgeCrossing(polygon[i], polygon[(i + 1) % n], y, &cx)) xs.push_back(cx);
  }
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
    if (xs[i] < xs[i + 1]) spans.emplace_back(xs[i], xs[i + 1]);
  }
  return spans;
}

std::int64_t CoveredPixels(const std::vector<const std::vector<Point>*>& polygons, std::int64_t x,
                           std::int64_t y, int side_px, int ds) {
  const std::int64_t lx0 = x / ds;
  const std::int64_t ly0 = y / ds;
  std::int64_t covered = 0;
  std::vector<std::pair<double, double>> spans;
  for (int row = 0; row < side_px; ++row) {
    const double cy = (static_cast<double>(ly0 + row) + 0.5) * ds;
    spans.clear();
    for (const auto* poly : polygons) {
      auto s = ScanlineSpans(*poly, cy);
      spans.insert(spans.end(), s.begin(), s.end());
    }
    if (spans.empty()) continue;
    // Convert each span to the half-open range of level columns whose centers
    // (k + 0.5) * ds fall in [begin, end), then merge.
    std::vector<std::pair<std::int64_t, std::int64_t>> cols;
    for (const auto& [b, e] : spans) {
      auto k0 = static_cast<std::int64_t>(std::ceil(b / ds - 0.5));
      auto k1 = static_cast<std::int64_t>(std::ceil(e / ds - 0.5));
      // Guard against rounding at the span edges.
      while (k0 > 0 && (static_cast<double>(k0 - 1) + 0.5) * ds >= b) --k0;
      while ((static_cast<double>(k0) + 0.5) * ds < b) ++k0;
      while (k1 > 0 && (static_cast<double>(k1 - 1) + 0.5) * ds >= e) --k1;
      while ((static_cast<double>(k1) + 0.5) * ds < e) ++k1;
      k0 = std::max(k0, lx0);
      k1 = std::min(k1, lx0 + side_px);
      if (k1 > k0) cols.emplace_back(k0, k1);
    }
    std::sort(cols.begin(), cols.end());
    std::int64_t run_begin = -1;
    std::int64_t run_end = -1;
    for (const auto& [k0, k1] : cols) {
      if (k0 > run_end) {
        covered += run_end - run_begin;
        run_begin = k0;
        run_end = k1;
      } else {
        run_end = std::max(run_end, k1);
      }
    }
    covered += run_end - run_begin;
  }
  return covered;
}

void AnnotationRegion::Validate(const SlideRef& slide) const {
  Require(slide.slide_id == slide_id, ErrorCode::kInvalidArgument, "annotation slide mismatch");
  Require(polygon.size() >= 3, ErrorCode::kInvalidArgument,
          "annotation '" + label + "' needs at least 3 vertices");
  for (const auto& p : polygon) {
    Require(p.x >= 0 && p.y >= 0 && p.x <= static_cast<double>(slide.base_width_px) &&
                p.y <= static_cast<double>(slide.base_height_px),
            ErrorCode::kInvalidArgument,
            "annotation '" + label + "' has a vertex outside slide " + std::to_string(slide_id));
  }
  Require(IsSimplePolygon(polygon), ErrorCode::kInvalidArgument,
          "annotation '" + label + "' on slide " + std::to_string(slide_id) +
              " is self-intersecting");
  if (kind == LabelKind::kGleason) {
    Require(ParseGleason(label).has_value(), ErrorCode::kInvalidArgument,
            "gleason annotation label must be NT, GP3, GP4 or GP5, got '" + label + "'");
  }
}

json ToJson(const AnnotationRegion& region) {
  json points = json::array();
  for (const auto& p : region.polygon) points.push_back({p.x, p.y});
  return json{{"slide_id", region.slide_id},
              {"label", region.label},
              {"label_kind", std::string(LabelKindName(region.kind))},
              {"points", points}};
}

std::vector<AnnotationRegion> ReadAnnotations(const std::filesystem::path& path) {
  const json doc = ReadJsonFile(path);
  Require(doc.is_array(), ErrorCode::kFormat, path.string() + " must hold a JSON array");
  std::vector<AnnotationRegion> regions;
  regions.reserve(doc.size());
  try {
    for (const auto& item : doc) {
      AnnotationRegion r;
      r.slide_id = item.at("slide_id").get<std::uint32_t>();
      r.label = item.at("label").get<std::string>();
      r.kind = ParseLabelKind(item.at("label_kind").get<std::string>());
      for (const auto& pt : item.at("points")) {
        r.polygon.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
      regions.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return regions;
}

void WriteAnnotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRegion>& regions) {
  json doc = json::array();
  for (const auto& r : regions) doc.push_back(ToJson(r));
  WriteFileAtomic(path, doc.dump(1) + "\n");
}

}  // namespace simsearch::dataset
