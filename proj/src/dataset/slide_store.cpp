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

#include "dataset/slide_store.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/json_io.hpp"
#include "common/png_io.hpp"

namespace simsearch::dataset {
namespace fs = std::filesystem;

namespace {

std::int64_t CeilDiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

SlideStore SlideStore::Open(const fs::path& root, std::size_t tile_cache_capacity) {
  SlideStore store;
  store.root_ = root;
  store.cache_->capacity = std::max<std::size_t>(1, tile_cache_capacity);
  const json manifest = ReadJsonFile(ManifestPath(root));
  Require(manifest.contains("slides") && manifest["slides"].is_array(), ErrorCode::kFormat,
          "manifest has no slides array");
  for (const auto& entry : manifest["slides"]) {
    SlideRef slide = SlideRefFromJson(entry);
    Require(!store.index_.count(slide.slide_id), ErrorCode::kFormat,
            "duplicate slide_id " + std::to_string(slide.slide_id) + " in manifest");
    store.index_[slide.slide_id] = store.slides_.size();
    store.slides_.push_back(std::move(slide));
  }
  // Every tile covering the declared level extents must exist.
  for (const auto& slide : store.slides_) {
    for (std::size_t level = 0; level < slide.levels.size(); ++level) {
      const auto tiles_x = CeilDiv(slide.LevelWidth(level), slide.tile_size_px);
      const auto tiles_y = CeilDiv(slide.LevelHeight(level), slide.tile_size_px);
      for (std::int64_t ty = 0; ty < tiles_y; ++ty) {
        for (std::int64_t tx = 0; tx < tiles_x; ++tx) {
          const auto path = store.TilePath(slide.slide_id, level, tx, ty);
          Require(fs::exists(path), ErrorCode::kNotFound, "missing tile " + path.string());
        }
      }
    }
  }
  return store;
}

const SlideRef& SlideStore::slide(std::uint32_t slide_id) const {
  auto it = index_.find(slide_id);
  Require(it != index_.end(), ErrorCode::kNotFound,
          "unknown slide_id " + std::to_string(slide_id));
  return slides_[it->second];
}

fs::path SlideStore::TilePath(std::uint32_t slide_id, std::size_t level, std::int64_t tx,
                              std::int64_t ty) const {
  return root_ / std::to_string(slide_id) / std::to_string(level) /
         (std::to_string(ty) + "_" + std::to_string(tx) + ".png");
}

std::shared_ptr<const Image> SlideStore::ReadTile(std::uint32_t slide_id, std::size_t level,
                                                  std::int64_t tx, std::int64_t ty) const {
  const TileKey key{slide_id, level, tx, ty};
  {
    std::lock_guard lock(cache_->mu);
    auto it = cache_->tiles.find(key);
    if (it != cache_->tiles.end()) {
      cache_->order.splice(cache_->order.begin(), cache_->order, it->second.second);
      return it->second.first;
    }
  }
  const auto path = TilePath(slide_id, level, tx, ty);
  Require(fs::exists(path), ErrorCode::kNotFound, "missing tile " + path.string());
  auto tile = std::make_shared<const Image>(DecodePng(ReadBinaryFile(path)));

  std::lock_guard lock(cache_->mu);
  if (cache_->tiles.count(key)) return cache_->tiles[key].first;
  cache_->order.push_front(key);
  cache_->tiles[key] = {tile, cache_->order.begin()};
  while (cache_->tiles.size() > cache_->capacity) {
    cache_->tiles.erase(cache_->order.back());
    cache_->order.pop_back();
  }
  return tile;
}

Image SlideStore::ReadRegion(std::uint32_t slide_id, Magnification mag, std::int64_t x,
                             std::int64_t y, int w, int h) const {
  const SlideRef& ref = slide(slide_id);
  const auto level = ref.LevelIndex(mag);
  Require(level.has_value(), ErrorCode::kInvalidArgument,
          "slide " + std::to_string(slide_id) + " has no " +
              std::string(MagnificationName(mag)) + " level");
  Require(w > 0 && h > 0, ErrorCode::kInvalidArgument, "region must be non-empty");
  const int ds = ref.levels[*level].downsample;
  Require(x >= 0 && y >= 0, ErrorCode::kInvalidArgument, "region origin must be non-negative");
  const std::int64_t lx = x / ds;
  const std::int64_t ly = y / ds;
  Require(lx + w <= ref.LevelWidth(*level) && ly + h <= ref.LevelHeight(*level),
          ErrorCode::kInvalidArgument,
          "region out of bounds on slide " + std::to_string(slide_id));

  const std::int64_t ts = ref.tile_size_px;
  Image out(w, h);
  for (std::int64_t ty = ly / ts; ty <= (ly + h - 1) / ts; ++ty) {
    for (std::int64_t tx = lx / ts; tx <= (lx + w - 1) / ts; ++tx) {
      const auto tile = ReadTile(slide_id, *level, tx, ty);
      // Intersection of the region with this tile, in level pixels.
      const std::int64_t x0 = std::max(lx, tx * ts);
      const std::int64_t x1 = std::min(lx + w, tx * ts + tile->width());
      const std::int64_t y0 = std::max(ly, ty * ts);
      const std::int64_t y1 = std::min(ly + h, ty * ts + tile->height());
      Require(x1 > x0 && y1 > y0, ErrorCode::kFormat, "tile smaller than the tile grid");
      const auto row_bytes = static_cast<std::size_t>(x1 - x0) * Image::kChannels;
      for (std::int64_t yy = y0; yy < y1; ++yy) {
        std::copy_n(tile->pixel(static_cast<int>(x0 - tx * ts), static_cast<int>(yy - ty * ts)),
                    row_bytes, out.pixel(static_cast<int>(x0 - lx), static_cast<int>(yy - ly)));
      }
    }
  }
  return out;
}

std::uint64_t SlideStore::ImageBytes() const {
  std::uint64_t total = 0;
  for (const auto& slide : slides_) {
    for (const auto& entry : fs::recursive_directory_iterator(root_ / std::to_string(slide.slide_id))) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") total += entry.file_size();
    }
  }
  return total;
}

json SlideStore::ManifestJson(const std::vector<SlideRef>& slides) {
  json list = json::array();
  for (const auto& s : slides) list.push_back(ToJson(s));
  return json{{"format", "simsearch-slides"}, {"version", 1}, {"slides", list}};
}

}  // namespace simsearch::dataset
