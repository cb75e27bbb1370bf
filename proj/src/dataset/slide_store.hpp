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
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "core_model/image.hpp"
#include "core_model/types.hpp"

namespace simsearch::dataset {

// On-disk tile pyramid:
//   <root>/manifest.json
//   <root>/<slide_id>/<level>/<ty>_<tx>.png
// Level indexes follow the manifest's level list (0 = base). Edge tiles are
// cropped to the level bounds.
class SlideStore {
 public:
  static SlideStore Open(const std::filesystem::path& root, std::size_t tile_cache_capacity = 64);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<SlideRef>& slides() const { return slides_; }
  const SlideRef& slide(std::uint32_t slide_id) const;
  bool contains(std::uint32_t slide_id) const { return index_.count(slide_id) > 0; }

  std::filesystem::path TilePath(std::uint32_t slide_id, std::size_t level, std::int64_t tx,
                                 std::int64_t ty) const;
  std::shared_ptr<const Image> ReadTile(std::uint32_t slide_id, std::size_t level,
                                        std::int64_t tx, std::int64_t ty) const;

  // Reads a w x h window of level pixels at magnification `mag`. (x, y) is
  // in base pixels and is floored to the level grid.
  Image ReadRegion(std::uint32_t slide_id, Magnification mag, std::int64_t x, std::int64_t y,
                   int w, int h) const;

  // Total bytes of all tile files.
  std::uint64_t ImageBytes() const;

  static std::filesystem::path ManifestPath(const std::filesystem::path& root) {
    return root / "manifest.json";
  }
  static json ManifestJson(const std::vector<SlideRef>& slides);

 private:
  using TileKey = std::tuple<std::uint32_t, std::size_t, std::int64_t, std::int64_t>;

  SlideStore() = default;

  std::filesystem::path root_;
  std::vector<SlideRef> slides_;
  std::map<std::uint32_t, std::size_t> index_;

  // LRU tile cache. Shared so the store stays copyable and cheap to pass.
  struct Cache {
    std::mutex mu;
    std::size_t capacity = 64;
    std::list<TileKey> order;
    std::map<TileKey, std::pair<std::shared_ptr<const Image>, std::list<TileKey>::iterator>> tiles;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace simsearch::dataset
