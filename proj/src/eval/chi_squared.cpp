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

#include "eval/chi_squared.hpp"

#include <cmath>

#include "common/error.hpp"

namespace simsearch::eval {

double ChiSquaredDf1PValue(double statistic) {
  Require(statistic >= 0 && std::isfinite(statistic), ErrorCode::kInvalidArgument,
          "chi-squared statistic must be finite and >= 0");
  return std::erfc(std::sqrt(statistic / 2.0));
}

ChiSquaredResult ChiSquared2x2(std::uint64_t a_hits, std::uint64_t a_total, std::uint64_t b_hits,
                               std::uint64_t b_total) {
  Require(a_total > 0 && b_total > 0, ErrorCode::kInvalidArgument, "group totals must be > 0");
  Require(a_hits <= a_total && b_hits <= b_total, ErrorCode::kInvalidArgument,
          "hits cannot exceed totals");
  ChiSquaredResult r;
  r.table = {{{a_hits, a_total - a_hits}, {b_hits, b_total - b_hits}}};
  const double n = static_cast<double>(a_total + b_total);
  const double rows[2] = {static_cast<double>(a_total), static_cast<double>(b_total)};
  const double cols[2] = {static_cast<double>(a_hits + b_hits),
                          static_cast<double>(a_total + b_total - a_hits - b_hits)};
  double x = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / n;
      Require(expected > 0, ErrorCode::kInvalidArgument,
              "chi-squared test undefined: an expected count is zero");
      const double d = static_cast<double>(r.table[i][j]) - expected;
      x += d * d / expected;
    }
  }
  r.statistic = x;
  r.p_value = ChiSquaredDf1PValue(x);
  return r;
}

json ToJson(const ChiSquaredResult& r) {
  return {{"name", r.name},
          {"statistic", r.statistic},
          {"df", r.df},
          {"p_value", r.p_value},
          {"table", {{r.table[0][0], r.table[0][1]}, {r.table[1][0], r.table[1][1]}}}};
}

ChiSquaredResult ChiSquaredFromJson(const json& j) {
  ChiSquaredResult r;
  r.name = j.value("name", "");
  r.statistic = j.at("statistic").get<double>();
  r.df = j.value("df", 1);
  r.p_value = j.at("p_value").get<double>();
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) r.table[i][k] = j.at("table").at(i).at(k).get<std::uint64_t>();
  }
  return r;
}

}  // namespace simsearch::eval
