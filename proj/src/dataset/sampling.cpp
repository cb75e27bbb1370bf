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

#include "dataset/sampling.hpp"

#include <algorithm>
#include <random>

#include "common/error.hpp"

namespace simsearch::dataset {

std::string_view ClassAxisName(ClassAxis axis) {
  switch (axis) {
    case ClassAxis::kFeature: return "feature";
    case ClassAxis::kGleason: return "gleason";
    case ClassAxis::kFeatureXOrgan: return "feature_x_organ";
  }
  return "?";
}

ClassAxis ParseClassAxis(std::string_view name) {
  for (auto a : {ClassAxis::kFeature, ClassAxis::kGleason, ClassAxis::kFeatureXOrgan}) {
    if (ClassAxisName(a) == name) return a;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown class axis '" + std::string(name) + "' (feature, gleason, feature_x_organ)");
}

std::optional<std::string> PrimaryClass(const LabelSet& labels, ClassAxis axis) {
  switch (axis) {
    case ClassAxis::kFeature:
      if (labels.histologic_features.empty()) return std::nullopt;
      return *labels.histologic_features.begin();
    case ClassAxis::kGleason:
      if (!labels.gleason) return std::nullopt;
      return std::string(GleasonName(*labels.gleason));
    case ClassAxis::kFeatureXOrgan:
      if (labels.histologic_features.empty() || !labels.organ) return std::nullopt;
      return *labels.histologic_features.begin() + "|" + *labels.organ;
  }
  return std::nullopt;
}

std::map<std::string, std::size_t> ClassHistogram(const std::vector<PatchRecord>& patches,
                                                  ClassAxis axis) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : patches) {
    if (auto c = PrimaryClass(p.labels, axis)) ++counts[*c];
  }
  return counts;
}

std::vector<PatchRecord> SampleBalanced(const std::vector<PatchRecord>& patches,
                                        std::size_t n_per_class, ClassAxis axis,
                                        std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (auto c = PrimaryClass(patches[i].labels, axis)) by_class[*c].push_back(i);
  }
  Require(!by_class.empty(), ErrorCode::kUnderflow,
          "no patches carry a label on axis " + std::string(ClassAxisName(axis)));
  std::string shortfall;
  for (const auto& [name, members] : by_class) {
    if (members.size() < n_per_class) {
      shortfall += " " + name + "=" + std::to_string(members.size());
    }
  }
  Require(shortfall.empty(), ErrorCode::kUnderflow,
          "class underflow: need " + std::to_string(n_per_class) + " per class, have" + shortfall);

  std::mt19937_64 rng(seed);
  std::vector<PatchRecord> out;
  out.reserve(n_per_class * by_class.size());
  for (auto& [name, members] : by_class) {
    // Candidates in patch_id order so the draw only depends on the seed.
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return patches[a].patch_id < patches[b].patch_id;
    });
    for (std::size_t i = 0; i < n_per_class; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
      out.push_back(patches[members[i]]);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PatchRecord& a, const PatchRecord& b) { return a.patch_id < b.patch_id; });
  return out;
}

}  // namespace simsearch::dataset
