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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core_model/types.hpp"

namespace simsearch::dataset {

enum class ClassAxis { kFeature, kGleason, kFeatureXOrgan };
std::string_view ClassAxisName(ClassAxis axis);
ClassAxis ParseClassAxis(std::string_view name);

// Balancing class of a patch, or nullopt if it has no label on the axis.
// Multi-label patches resolve to their lexicographically first feature.
std::optional<std::string> PrimaryClass(const LabelSet& labels, ClassAxis axis);

// Per-class counts of patches with a label on `axis`.
std::map<std::string, std::size_t> ClassHistogram(const std::vector<PatchRecord>& patches,
                                                  ClassAxis axis);

// Exactly n_per_class patches from every class, without replacement. The
// result is sorted by patch_id. Throws kUnderflow naming every short class.
std::vector<PatchRecord> SampleBalanced(const std::vector<PatchRecord>& patches,
                                        std::size_t n_per_class, ClassAxis axis,
                                        std::uint64_t seed);

}  // namespace simsearch::dataset
