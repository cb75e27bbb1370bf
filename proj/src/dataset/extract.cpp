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

#include "dataset/extract.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/parallel.hpp"

namespace simsearch::dataset {

namespace {

struct LabelGroup {
  LabelKind kind;
  std::string label;
  std::vector<const std::vector<Point>*> polygons;
  // Bounding box of all polygons, base pixels.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

std::vector<LabelGroup> GroupBySlideLabel(const std::vector<AnnotationRegion>& annotations,
                                          std::uint32_t slide_id) {
  std::map<std::pair<int, std::string>, LabelGroup> groups;
  for (const auto& a : annotations) {
    if (a.slide_id != slide_id) continue;
    auto key = std::make_pair(static_cast<int>(a.kind), a.label);
    auto [it, inserted] = groups.try_emplace(key);
    LabelGroup& g = it->second;
    if (inserted) {
      g.kind = a.kind;
      g.label = a.label;
      g.x0 = g.y0 = 1e300;
      g.x1 = g.y1 = -1e300;
    }
    g.polygons.push_back(&a.polygon);
    for (const auto& p : a.polygon) {
      g.x0 = std::min(g.x0, p.x);
      g.y0 = std::min(g.y0, p.y);
      g.x1 = std::max(g.x1, p.x);
      g.y1 = std::max(g.y1, p.y);
    }
  }
  std::vector<LabelGroup> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<PatchRecord> ExtractSlide(const SlideRef& slide,
                                      const std::vector<AnnotationRegion>& annotations,
                                      const ExtractOptions& options) {
  const auto groups = GroupBySlideLabel(annotations, slide.slide_id);
  const int stride = options.stride_px > 0 ? options.stride_px : options.side_px;
  const auto area = static_cast<double>(options.side_px) * options.side_px;
  std::vector<PatchRecord> out;
  for (auto mag : options.magnifications) {
    const auto level = slide.LevelIndex(mag);
    Require(level.has_value(), ErrorCode::kInvalidArgument,
            "slide " + std::to_string(slide.slide_id) + " has no " +
                std::string(MagnificationName(mag)) + " level");
    const int ds = Downsample(mag);
    const std::int64_t lw = slide.LevelWidth(*level);
    const std::int64_t lh = slide.LevelHeight(*level);
    for (std::int64_t ly = 0; ly + options.side_px <= lh; ly += stride) {
      for (std::int64_t lx = 0; lx + options.side_px <= lw; lx += stride) {
        PatchRecord p;
        p.slide_id = slide.slide_id;
        p.magnification = mag;
        p.x = lx * ds;
        p.y = ly * ds;
        p.side_px = options.side_px;
        const double bx0 = static_cast<double>(p.x);
        const double by0 = static_cast<double>(p.y);
        const double bx1 = bx0 + static_cast<double>(p.base_side());
        const double by1 = by0 + static_cast<double>(p.base_side());

        double best_organ = -1, best_gleason = -1;
        for (const auto& g : groups) {
          if (g.x1 <= bx0 || g.x0 >= bx1 || g.y1 <= by0 || g.y0 >= by1) continue;
          const double coverage =
              static_cast<double>(CoveredPixels(g.polygons, p.x, p.y, p.side_px, ds)) / area;
          if (coverage < options.coverage_threshold) continue;
          switch (g.kind) {
            case LabelKind::kHistologicFeature:
              p.labels.histologic_features.insert(g.label);
              break;
            case LabelKind::kOrgan:
              // Groups are visited in label order, so ties keep the first label.
              if (coverage > best_organ) {
                best_organ = coverage;
                p.labels.organ = g.label;
              }
              break;
            case LabelKind::kGleason:
              if (coverage > best_gleason) {
                best_gleason = coverage;
                p.labels.gleason = ParseGleason(g.label);
                p.labels.tumor_present = *p.labels.gleason != Gleason::kNT;
              }
              break;
          }
        }
        if (p.labels.empty() && !options.keep_unlabeled) continue;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<PatchRecord> ExtractPatches(const SlideStore& store,
                                        const std::vector<AnnotationRegion>& annotations,
                                        const ExtractOptions& options) {
  Require(options.side_px > 0, ErrorCode::kInvalidArgument, "side_px must be positive");
  Require(options.stride_px >= 0, ErrorCode::kInvalidArgument, "stride must be non-negative");
  Require(options.coverage_threshold > 0 && options.coverage_threshold <= 1,
          ErrorCode::kInvalidArgument, "coverage_threshold must be in (0, 1]");
  Require(!options.magnifications.empty(), ErrorCode::kInvalidArgument,
          "at least one magnification is required");
  for (const auto& a : annotations) {
    Require(store.contains(a.slide_id), ErrorCode::kNotFound,
            "annotation references unknown slide " + std::to_string(a.slide_id));
    a.Validate(store.slide(a.slide_id));
  }
  auto mags = options.magnifications;
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
  ExtractOptions sorted = options;
  sorted.magnifications = mags;

  std::vector<SlideRef> slides = store.slides();
  std::sort(slides.begin(), slides.end(),
            [](const SlideRef& a, const SlideRef& b) { return a.slide_id < b.slide_id; });
  std::vector<std::vector<PatchRecord>> per_slide(slides.size());
  ParallelFor(slides.size(), options.threads, [&](std::size_t i) {
    per_slide[i] = ExtractSlide(slides[i], annotations, sorted);
  });

  std::vector<PatchRecord> out;
  std::uint64_t next_id = 0;
  for (auto& batch : per_slide) {
    for (auto& p : batch) {
      p.patch_id = next_id++;
      out.push_back(std::move(p));
    }
  }
  return out;
}

void WritePatchTable(const std::filesystem::path& path, const std::vector<PatchRecord>& patches) {
  std::ostringstream out;
  for (const auto& p : patches) out << ToJson(p).dump() << '\n';
  WriteFileAtomic(path, out.str());
}

std::vector<PatchRecord> ReadPatchTable(const std::filesystem::path& path) {
  std::vector<PatchRecord> patches;
  ForEachNdjsonLine(path, [&](const json& j, std::size_t) { patches.push_back(PatchRecordFromJson(j)); });
  return patches;
}

}  // namespace simsearch::dataset
