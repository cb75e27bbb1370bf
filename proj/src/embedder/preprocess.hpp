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

#include "core_model/image.hpp"

namespace simsearch::embed {

inline constexpr int kInputSide = 224;
inline constexpr int kMinQuerySide = 200;
inline constexpr int kMaxQuerySide = 400;

// Bilinear resize with corner-aligned sampling: output pixel i samples the
// source at i * (in - 1) / (out - 1), so both edges map exactly onto the
// source edges. Weights are exact integers and results are rounded half up,
// which makes the resize commute with every square symmetry bit for bit.
Image ResizeBilinear(const Image& src, int out_width, int out_height);

// Resize to the 224x224 embedder input. No size restriction.
Image PreprocessPatch(const Image& img);

// Same as PreprocessPatch, but enforces the 200..400 px query selection rule.
Image PreprocessQuery(const Image& img);

}  // namespace simsearch::embed
