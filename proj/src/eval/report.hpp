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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eval/chi_squared.hpp"
#include "eval/metrics.hpp"

namespace simsearch::eval {

struct EvalOptions {
  int k = 5;
  LabelAxis axis = LabelAxis::kFeature;
  MatchMode mode = MatchMode::kLenient;
  std::vector<int> report_ks{1, 5, 10};
};

struct EvalReport {
  std::map<int, double> top_k_scores;
  double mean_match = 0;
  double rank_weighted = 0;
  std::map<int, double> top_k_curve;
  ConfusionMatrix confusion;
  std::map<std::string, double> class_top_k;  // per-class top-k score at EvalOptions::k
  std::optional<double> organ_match;
  std::optional<double> gleason_match;
  std::optional<double> combined_match;
  std::optional<double> rubric_mean;  // mean rubric score / 100 over all (query, result) pairs
  std::vector<ChiSquaredResult> tests;
  std::size_t queries = 0;
  std::size_t hits = 0;  // queries with a match in the top k on the primary axis
  std::size_t exhausted = 0;
  json config;
};

// Computes every metric of one run. Axes other than the primary one are
// reported only when every query carries them.
EvalReport Evaluate(const RetrievalRun& run, const EvalOptions& options);

// Mean rubric score / 100 over the first k results of every query, or nullopt
// when some query or result lacks the tumor flag.
std::optional<double> RubricMean(const RetrievalRun& run, int k);

json ToJson(const EvalReport& r);
std::string ConfusionCsv(const ConfusionMatrix& m);
std::string DumpReport(const json& j);  // stable, indented, newline-terminated

}  // namespace simsearch::eval
