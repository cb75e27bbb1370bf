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
#include <span>
#include <vector>

#include "core_model/image.hpp"

namespace simsearch {

// 8-bit RGB only. Encoding is deterministic for identical pixels.
std::vector<std::uint8_t> EncodePng(const Image& image);
Image DecodePng(std::span<const std::uint8_t> bytes);

}  // namespace simsearch
