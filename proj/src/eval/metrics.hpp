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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core_model/types.hpp"

namespace simsearch::eval {

enum class LabelAxis { kFeature, kOrgan, kGleason };
std::string_view LabelAxisName(LabelAxis axis);
LabelAxis ParseLabelAxis(std::string_view name);

// Lenient: label sets intersect on the axis. Strict: primary labels equal.
enum class MatchMode { kLenient, kStrict };
std::string_view MatchModeName(MatchMode mode);
MatchMode ParseMatchMode(std::string_view name);

// The labels a LabelSet carries on an axis (sorted).
std::set<std::string> AxisLabels(const LabelSet& labels, LabelAxis axis);
// Lexicographically first axis label, or nullopt.
std::optional<std::string> PrimaryLabel(const LabelSet& labels, LabelAxis axis);

bool Matches(const LabelSet& query, const LabelSet& result, LabelAxis axis, MatchMode mode);

struct RetrievalQuery {
  PatchRecord query;
  std::vector<PatchRecord> results;  // ranked, post filter
  bool exhausted = false;
};

struct RetrievalRun {
  std::vector<RetrievalQuery> queries;
  json config;  // embedder, db size, magnification, k, seed, ...
};

// Fraction of queries with at least one matching result among the first k.
// Throws kInvalidArgument when a query lacks the axis, or when a query has
// fewer than k results without being flagged exhausted.
double TopKScore(const RetrievalRun& run, int k, LabelAxis axis, MatchMode mode = MatchMode::kLenient);

// Top-k score restricted to the queries whose primary label is `cls`.
double ClassTopKScore(const RetrievalRun& run, const std::string& cls, int k, LabelAxis axis,
                      MatchMode mode = MatchMode::kLenient);

// At least one result within the first k that matches on every axis in `axes`
// that the query carries. Queries carrying none of the axes are skipped.
double CombinedTopKScore(const RetrievalRun& run, int k, const std::vector<LabelAxis>& axes,
                         MatchMode mode = MatchMode::kLenient);

struct MetricVariants {
  double mean_match = 0;     // mean of (matches in top k) / k
  double rank_weighted = 0;  // linear weights (k - r + 1) / (k (k + 1) / 2)
  std::map<int, double> top_k_curve;  // k = 1..10, over available results
};

MetricVariants ComputeMetricVariants(const RetrievalRun& run, int k, LabelAxis axis,
                                     MatchMode mode = MatchMode::kLenient);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> m;  // m[i][j] in [0,1]; rows need not sum to 1
  std::vector<std::size_t> row_counts;
};

// m[i][j] = fraction of class-i queries whose first k results contain a
// class-j result. Class membership follows `mode` (any label vs primary).
// Throws kInvalidArgument when a query's primary class is not in `classes`.
ConfusionMatrix ComputeConfusion(const RetrievalRun& run, const std::vector<std::string>& classes,
                                 int k, LabelAxis axis, MatchMode mode = MatchMode::kLenient);

// Primary-label classes present among the queries, sorted.
std::vector<std::string> QueryClasses(const RetrievalRun& run, LabelAxis axis);

}  // namespace simsearch::eval
