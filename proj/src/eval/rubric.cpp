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

#include "eval/rubric.hpp"

#include "common/error.hpp"

namespace simsearch::eval {
namespace {

bool SharesFeature(const LabelSet& a, const LabelSet& b) {
  for (const auto& f : a.histologic_features) {
    if (b.histologic_features.count(f)) return true;
  }
  return false;
}

void Check(const LabelSet& l, const char* which) {
  Require(l.tumor_present.has_value(), ErrorCode::kInvalidArgument,
          std::string(which) + " labels lack the tumor flag");
  Require(!*l.tumor_present || (l.gleason && *l.gleason != Gleason::kNT), ErrorCode::kInvalidArgument,
          std::string(which) + " labels mark tumor without a grade");
}

}  // namespace

int RubricScore(const LabelSet& query, const LabelSet& result) {
  Check(query, "query");
  Check(result, "result");
  const bool overlap = SharesFeature(query, result);
  if (*query.tumor_present != *result.tumor_present) return overlap ? 25 : 0;
  if (*query.tumor_present && *query.gleason != *result.gleason) return 50;
  return overlap ? 100 : 75;
}

}  // namespace simsearch::eval
