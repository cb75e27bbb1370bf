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
#include <string>

#include "core_model/types.hpp"

namespace simsearch::eval {

struct ChiSquaredResult {
  std::string name;
  double statistic = 0;
  int df = 1;
  double p_value = 1;
  // {{a_hits, a_misses}, {b_hits, b_misses}}
  std::array<std::array<std::uint64_t, 2>, 2> table{};
};

// Pearson chi-squared on the 2x2 table of hits/misses for groups a and b,
// without continuity correction. Two-tailed p from the df = 1 survival
// function, erfc(sqrt(x / 2)). Throws kInvalidArgument when a total is zero
// or any expected count is zero.
ChiSquaredResult ChiSquared2x2(std::uint64_t a_hits, std::uint64_t a_total, std::uint64_t b_hits,
                               std::uint64_t b_total);

// Survival function of chi-squared with one degree of freedom.
double ChiSquaredDf1PValue(double statistic);

json ToJson(const ChiSquaredResult& r);
ChiSquaredResult ChiSquaredFromJson(const json& j);

}  // namespace simsearch::eval
