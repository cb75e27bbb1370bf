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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "core_model/image.hpp"

namespace simsearch {

// The eight symmetries of the square. Rotations are counter-clockwise; for
// the M* codes a horizontal mirror is applied first, then the rotation.
// The numeric code is mirror * 4 + quarter_turns.
enum class Orientation : std::uint8_t {
  kR0 = 0,
  kR90 = 1,
  kR180 = 2,
  kR270 = 3,
  kMR0 = 4,
  kMR90 = 5,
  kMR180 = 6,
  kMR270 = 7,
};

inline constexpr int kNumOrientations = 8;

inline constexpr std::array<Orientation, kNumOrientations> kAllOrientations = {
    Orientation::kR0,  Orientation::kR90,  Orientation::kR180,  Orientation::kR270,
    Orientation::kMR0, Orientation::kMR90, Orientation::kMR180, Orientation::kMR270,
};

constexpr int OrientationCode(Orientation o) { return static_cast<int>(o); }
constexpr bool IsMirrored(Orientation o) { return OrientationCode(o) >= 4; }
constexpr int QuarterTurns(Orientation o) { return OrientationCode(o) & 3; }

Orientation OrientationFromCode(int code);
std::string_view OrientationName(Orientation o);
std::optional<Orientation> ParseOrientation(std::string_view name);

// Group product a * b, where b acts first:
//   ApplyOrientation(ApplyOrientation(img, b), a)
//       == ApplyOrientation(img, ComposeOrientations(a, b)).
Orientation ComposeOrientations(Orientation a, Orientation b);

Orientation InverseOrientation(Orientation o);

// Pixel permutation. Odd quarter turns require a square image.
Image ApplyOrientation(const Image& image, Orientation o);

}  // namespace simsearch
