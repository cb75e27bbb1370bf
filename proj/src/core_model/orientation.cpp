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

#include "core_model/orientation.hpp"

#include <string>

#include "common/error.hpp"

namespace simsearch {
namespace {

constexpr std::array<std::string_view, kNumOrientations> kNames = {
    "R0", "R90", "R180", "R270", "MR0", "MR90", "MR180", "MR270"};

constexpr Orientation Make(bool mirror, int turns) {
  return static_cast<Orientation>((mirror ? 4 : 0) + (((turns % 4) + 4) % 4));
}

}  // namespace

Orientation OrientationFromCode(int code) {
  Require(code >= 0 && code < kNumOrientations, ErrorCode::kInvalidArgument,
          "orientation code out of range: " + std::to_string(code));
  return static_cast<Orientation>(code);
}

std::string_view OrientationName(Orientation o) { return kNames[OrientationCode(o)]; }

std::optional<Orientation> ParseOrientation(std::string_view name) {
  for (int i = 0; i < kNumOrientations; ++i) {
    if (kNames[i] == name) return static_cast<Orientation>(i);
  }
  return std::nullopt;
}

// Elements act as Rot^t * Mirror^m. Since Mirror * Rot = Rot^-1 * Mirror,
// (t1, m1) * (t2, m2) = (t1 + (m1 ? -t2 : t2), m1 xor m2).
Orientation ComposeOrientations(Orientation a, Orientation b) {
  const int turns = QuarterTurns(a) + (IsMirrored(a) ? -QuarterTurns(b) : QuarterTurns(b));
  return Make(IsMirrored(a) != IsMirrored(b), turns);
}

Orientation InverseOrientation(Orientation o) {
  // Mirrored elements are involutions.
  if (IsMirrored(o)) return o;
  return Make(false, -QuarterTurns(o));
}

Image ApplyOrientation(const Image& image, Orientation o) {
  const int w = image.width();
  const int h = image.height();
  const int turns = QuarterTurns(o);
  const bool mirror = IsMirrored(o);
  if (turns % 2 == 1) {
    Require(w == h, ErrorCode::kInvalidArgument,
            "rotation by 90/270 degrees requires a square image, got " +
                std::to_string(w) + "x" + std::to_string(h));
  }
  if (o == Orientation::kR0) return image;

  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Coordinates in the mirrored intermediate image.
      int mx = x;
      int my = y;
      switch (turns) {
        case 1: mx = w - 1 - y; my = x; break;
        case 2: mx = w - 1 - x; my = h - 1 - y; break;
        case 3: mx = y; my = h - 1 - x; break;
        default: break;
      }
      const int sx = mirror ? w - 1 - mx : mx;
      const std::uint8_t* src = image.pixel(sx, my);
      std::uint8_t* dst = out.pixel(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

}  // namespace simsearch
