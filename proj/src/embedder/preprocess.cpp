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

#include "embedder/preprocess.hpp"

#include <string>
#include <vector>

#include "common/error.hpp"

namespace simsearch::embed {

namespace {

struct Tap {
  int lo;
  int hi;
  std::int64_t frac;  // weight of `hi`, out of the axis denominator
};

std::vector<Tap> Taps(int in, int out, std::int64_t* den) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  *den = out > 1 ? out - 1 : 1;
  for (int i = 0; i < out; ++i) {
    const std::int64_t num = out > 1 ? static_cast<std::int64_t>(i) * (in - 1) : 0;
    const int lo = static_cast<int>(num / *den);
    taps[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, in - 1), num % *den};
  }
  return taps;
}

}  // namespace

Image ResizeBilinear(const Image& src, int out_width, int out_height) {
  Require(!src.empty(), ErrorCode::kInvalidArgument, "cannot resize an empty image");
  Require(out_width > 0 && out_height > 0, ErrorCode::kInvalidArgument,
          "resize target must be positive");
  if (src.width() == out_width && src.height() == out_height) return src;

  std::int64_t den_x = 1, den_y = 1;
  const auto xs = Taps(src.width(), out_width, &den_x);
  const auto ys = Taps(src.height(), out_height, &den_y);
  const std::int64_t den = den_x * den_y;
  Image out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    const std::int64_t wy1 = ty.frac;
    const std::int64_t wy0 = den_y - wy1;
    for (int x = 0; x < out_width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const std::int64_t wx1 = tx.frac;
      const std::int64_t wx0 = den_x - wx1;
      const std::uint8_t* p00 = src.pixel(tx.lo, ty.lo);
      const std::uint8_t* p10 = src.pixel(tx.hi, ty.lo);
      const std::uint8_t* p01 = src.pixel(tx.lo, ty.hi);
      const std::uint8_t* p11 = src.pixel(tx.hi, ty.hi);
      std::uint8_t* dst = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const std::int64_t acc = p00[c] * wx0 * wy0 + p10[c] * wx1 * wy0 +
                                 p01[c] * wx0 * wy1 + p11[c] * wx1 * wy1;
        dst[c] = static_cast<std::uint8_t>((2 * acc + den) / (2 * den));
      }
    }
  }
  return out;
}

Image PreprocessPatch(const Image& img) { return ResizeBilinear(img, kInputSide, kInputSide); }

Image PreprocessQuery(const Image& img) {
  Require(img.width() >= kMinQuerySide && img.width() <= kMaxQuerySide &&
              img.height() >= kMinQuerySide && img.height() <= kMaxQuerySide,
          ErrorCode::kInvalidArgument,
          "query region must be between 200 and 400 pixels in width and height, got " +
              std::to_string(img.width()) + "x" + std::to_string(img.height()));
  return PreprocessPatch(img);
}

}  // namespace simsearch::embed
