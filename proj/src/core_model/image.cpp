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

#include "core_model/image.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"

namespace simsearch {

Image::Image(int width, int height)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels) {
  Require(width >= 0 && height >= 0, ErrorCode::kInvalidArgument,
          "negative image dimensions");
}

Image::Image(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  Require(width >= 0 && height >= 0, ErrorCode::kInvalidArgument,
          "negative image dimensions");
  Require(pixels_.size() ==
              static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kChannels,
          ErrorCode::kInvalidArgument,
          "pixel buffer size does not match " + std::to_string(width) + "x" +
              std::to_string(height) + "x3");
}

Image Image::Crop(int x, int y, int w, int h) const {
  Require(x >= 0 && y >= 0 && w >= 0 && h >= 0 && x + w <= width_ && y + h <= height_,
          ErrorCode::kInvalidArgument, "crop window outside image");
  Image out(w, h);
  const std::size_t row_bytes = static_cast<std::size_t>(w) * kChannels;
  for (int row = 0; row < h; ++row) {
    std::copy_n(pixel(x, y + row), row_bytes, out.pixel(0, row));
  }
  return out;
}

}  // namespace simsearch
