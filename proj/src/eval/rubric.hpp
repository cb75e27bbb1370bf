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

#include "core_model/types.hpp"

namespace simsearch::eval {

// Multi-aspect match quality in steps of 25:
//   0   tumor presence differs, feature sets disjoint
//   25  tumor presence differs, at least one shared feature
//   50  both tumor, grades differ
//   75  grades equal (or both non-tumor), no shared feature
//   100 grades equal (or both non-tumor), at least one shared feature
// Throws kInvalidArgument when tumor_present is missing, or a tumor patch
// has no grade.
int RubricScore(const LabelSet& query, const LabelSet& result);

}  // namespace simsearch::eval
