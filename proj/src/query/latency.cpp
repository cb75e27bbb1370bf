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

#include "query/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "common/error.hpp"

namespace simsearch::query {

double Percentile(std::vector<double> values, double q) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(q * n)));
  return values[std::min(rank, values.size()) - 1];
}

LatencyReport LatencyBench(const QueryEngine& engine, const std::vector<QuerySpec>& specs,
                           std::size_t warmup) {
  Require(engine.db().table().size() > 0, ErrorCode::kState, "cannot benchmark an empty database");
  Require(!specs.empty(), ErrorCode::kInvalidArgument, "no benchmark queries");
  for (std::size_t i = 0; i < warmup; ++i) engine.Run(specs[i % specs.size()]);

  std::vector<double> total;
  std::vector<std::vector<double>> per_shard(engine.db().shard_count());
  for (const auto& spec : specs) {
    const auto start = std::chrono::steady_clock::now();
    const auto outcome = engine.Run(spec);
    total.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    for (std::size_t s = 0; s < outcome.shard_ms.size(); ++s) per_shard[s].push_back(outcome.shard_ms[s]);
  }
  LatencyReport r;
  r.queries = total.size();
  r.median_ms = Percentile(total, 0.5);
  r.p95_ms = Percentile(total, 0.95);
  double sum = 0;
  for (double t : total) sum += t;
  r.mean_ms = sum / static_cast<double>(total.size());
  r.max_ms = *std::max_element(total.begin(), total.end());
  for (const auto& s : per_shard) r.shard_median_ms.push_back(s.empty() ? 0.0 : Percentile(s, 0.5));
  return r;
}

json ToJson(const LatencyReport& r) {
  return {{"queries", r.queries}, {"median_ms", r.median_ms},   {"p95_ms", r.p95_ms},
          {"mean_ms", r.mean_ms}, {"max_ms", r.max_ms}, {"shard_median_ms", r.shard_median_ms}};
}

}  // namespace simsearch::query
