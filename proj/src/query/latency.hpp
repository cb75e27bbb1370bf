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

#include <vector>

#include "query/engine.hpp"

namespace simsearch::query {

struct LatencyReport {
  std::size_t queries = 0;
  double median_ms = 0;
  double p95_ms = 0;
  double mean_ms = 0;
  double max_ms = 0;
  std::vector<double> shard_median_ms;
};

// Runs every spec once after `warmup` untimed runs and reports wall-clock
// statistics of QueryEngine::Run. Throws on an empty database or query list.
LatencyReport LatencyBench(const QueryEngine& engine, const std::vector<QuerySpec>& specs,
                           std::size_t warmup = 5);

// Nearest-rank percentile of an unsorted sample, q in [0, 1].
double Percentile(std::vector<double> values, double q);

json ToJson(const LatencyReport& r);

}  // namespace simsearch::query
