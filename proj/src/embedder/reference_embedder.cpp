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

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <string>

#include "common/error.hpp"
#include "embedder/embedder.hpp"
#include "embedder/preprocess.hpp"

namespace simsearch::embed {

namespace {

constexpr int kGrid = 4;
constexpr int kCell = kInputSide / kGrid;  // 56

void RequireInput(const Image& img) {
  Require(img.width() == kInputSide && img.height() == kInputSide, ErrorCode::kInvalidArgument,
          "embedder expects a 224x224 image, got " + std::to_string(img.width()) + "x" +
              std::to_string(img.height()));
}

void ColorHistogram(const Image& img, std::vector<double>& out) {
  std::array<std::int64_t, kColorBins> counts{};
  const auto data = img.data();
  for (std::size_t i = 0; i < data.size(); i += 3) {
    ++counts[data[i] >> 4];
    ++counts[16 + (data[i + 1] >> 4)];
    ++counts[32 + (data[i + 2] >> 4)];
  }
  const double n = static_cast<double>(img.width()) * img.height();
  for (int b = 0; b < kColorBins; ++b) out.push_back(static_cast<double>(counts[b]) / n);
}

// Unsigned gradient direction in [0, 180) degrees, binned into 45 degree
// half-open sectors using exact integer comparisons.
int OrientationBin(std::int64_t gx, std::int64_t gy) {
  if (gy < 0 || (gy == 0 && gx < 0)) {
    gx = -gx;
    gy = -gy;
  }
  if (gx > 0) return gy < gx ? 0 : 1;
  return gy > -gx ? 2 : 3;
}

}  // namespace

Embedding ReferenceEmbedder::Embed(const Image& img) const {
  RequireInput(img);
  std::vector<double> raw;
  raw.reserve(128);
  ColorHistogram(img, raw);
  // Luminance scaled by 1000: 299 R + 587 G + 114 B. Fits in 32 bits.
  std::vector<std::int32_t> lum(static_cast<std::size_t>(kInputSide) * kInputSide);
  std::array<std::int64_t, kLuminanceBins> lum_sum{};
  const std::uint8_t* px = img.data().data();
  for (int y = 0; y < kInputSide; ++y) {
    std::int32_t* row = lum.data() + static_cast<std::size_t>(y) * kInputSide;
    std::int64_t* sums = lum_sum.data() + (y / kCell) * kGrid;
    for (int cx = 0; cx < kGrid; ++cx) {
      std::int64_t acc = 0;
      for (int x = cx * kCell; x < (cx + 1) * kCell; ++x, px += 3) {
        row[x] = 299 * px[0] + 587 * px[1] + 114 * px[2];
        acc += row[x];
      }
      sums[cx] += acc;
    }
  }
  // Central differences on interior pixels, L1 magnitude weighting.
  std::array<std::int64_t, kGradientBins> grad{};
  for (int y = 1; y < kInputSide - 1; ++y) {
    const std::int32_t* up = lum.data() + static_cast<std::size_t>(y - 1) * kInputSide;
    const std::int32_t* mid = up + kInputSide;
    const std::int32_t* down = mid + kInputSide;
    std::int64_t* cells = grad.data() + (y / kCell) * kGrid * 4;
    for (int x = 1; x < kInputSide - 1; ++x) {
      const std::int64_t gx = mid[x + 1] - mid[x - 1];
      const std::int64_t gy = down[x] - up[x];
      const std::int64_t mag = std::llabs(gx) + std::llabs(gy);
      if (mag == 0) continue;
      cells[(x / kCell) * 4 + OrientationBin(gx, gy)] += mag;
    }
  }
  for (int cell = 0; cell < kGrid * kGrid; ++cell) {
    const std::int64_t total = grad[cell * 4] + grad[cell * 4 + 1] + grad[cell * 4 + 2] +
                               grad[cell * 4 + 3];
    for (int b = 0; b < 4; ++b) {
      raw.push_back(total > 0 ? static_cast<double>(grad[cell * 4 + b]) / static_cast<double>(total)
                              : 0.0);
    }
  }
  const double lum_scale = static_cast<double>(kCell) * kCell * 255000.0;
  for (int cell = 0; cell < kLuminanceBins; ++cell) {
    raw.push_back(static_cast<double>(lum_sum[cell]) / lum_scale);
  }
  return NormalizeL2(raw);
}

Embedding ColorOnlyEmbedder::Embed(const Image& img) const {
  RequireInput(img);
  std::vector<double> raw;
  raw.reserve(128);
  ColorHistogram(img, raw);
  raw.resize(128, 0.0);
  return NormalizeL2(raw);
}

Embedding NormalizeL2(const std::vector<double>& raw) {
  std::vector<double> squares(raw.size());
  std::transform(raw.begin(), raw.end(), squares.begin(), [](double v) { return v * v; });
  std::sort(squares.begin(), squares.end());
  double sum = 0;
  for (double s : squares) sum += s;
  Embedding out(raw.size(), 0.0f);
  if (!(sum > 0) || !std::isfinite(sum)) {
    if (!out.empty()) out[0] = 1.0f;
    return out;
  }
  const double norm = std::sqrt(sum);
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(raw[i] / norm);
  return out;
}

}  // namespace simsearch::embed
