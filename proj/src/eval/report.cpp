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

#include "eval/report.hpp"

#include <sstream>

#include "common/error.hpp"
#include "eval/rubric.hpp"

namespace simsearch::eval {
namespace {

bool AllCarry(const RetrievalRun& run, LabelAxis axis) {
  if (run.queries.empty()) return false;
  for (const auto& q : run.queries) {
    if (AxisLabels(q.query.labels, axis).empty()) return false;
  }
  return true;
}

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ScoreMap(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

std::optional<double> RubricMean(const RetrievalRun& run, int k) {
  std::uint64_t sum = 0;
  std::uint64_t n = 0;
  for (const auto& q : run.queries) {
    if (!q.query.labels.tumor_present) return std::nullopt;
    const std::size_t m = std::min(q.results.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < m; ++r) {
      if (!q.results[r].labels.tumor_present) return std::nullopt;
      sum += static_cast<std::uint64_t>(RubricScore(q.query.labels, q.results[r].labels));
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(sum) / (100.0 * static_cast<double>(n));
}

EvalReport Evaluate(const RetrievalRun& run, const EvalOptions& options) {
  Require(!run.queries.empty(), ErrorCode::kInvalidArgument, "no queries to evaluate");
  EvalReport r;
  r.queries = run.queries.size();
  r.config = run.config;
  for (int k : options.report_ks) r.top_k_scores[k] = TopKScore(run, k, options.axis, options.mode);
  r.top_k_scores[options.k] = TopKScore(run, options.k, options.axis, options.mode);
  for (const auto& q : run.queries) {
    r.exhausted += q.exhausted ? 1 : 0;
    const std::size_t n = std::min(q.results.size(), static_cast<std::size_t>(options.k));
    for (std::size_t i = 0; i < n; ++i) {
      if (Matches(q.query.labels, q.results[i].labels, options.axis, options.mode)) {
        ++r.hits;
        break;
      }
    }
  }
  const auto variants = ComputeMetricVariants(run, options.k, options.axis, options.mode);
  r.mean_match = variants.mean_match;
  r.rank_weighted = variants.rank_weighted;
  r.top_k_curve = variants.top_k_curve;
  const auto classes = QueryClasses(run, options.axis);
  r.confusion = ComputeConfusion(run, classes, options.k, options.axis, options.mode);
  for (const auto& c : classes) {
    r.class_top_k[c] = ClassTopKScore(run, c, options.k, options.axis, options.mode);
  }
  if (AllCarry(run, LabelAxis::kOrgan)) {
    r.organ_match = TopKScore(run, options.k, LabelAxis::kOrgan, options.mode);
  }
  if (AllCarry(run, LabelAxis::kGleason)) {
    r.gleason_match = TopKScore(run, options.k, LabelAxis::kGleason, options.mode);
  }
  if (r.organ_match || r.gleason_match) {
    r.combined_match = CombinedTopKScore(
        run, options.k, {LabelAxis::kFeature, LabelAxis::kOrgan, LabelAxis::kGleason}, options.mode);
  }
  r.rubric_mean = RubricMean(run, options.k);
  return r;
}

json ToJson(const EvalReport& r) {
  json confusion = {{"classes", r.confusion.classes},
                    {"matrix", r.confusion.m},
                    {"row_counts", r.confusion.row_counts}};
  json tests = json::array();
  for (const auto& t : r.tests) tests.push_back(ToJson(t));
  json class_scores = json::object();
  for (const auto& [c, v] : r.class_top_k) class_scores[c] = v;
  return {{"config", r.config},
          {"queries", r.queries},
          {"hits", r.hits},
          {"exhausted_queries", r.exhausted},
          {"top_k_scores", ScoreMap(r.top_k_scores)},
          {"mean_match", r.mean_match},
          {"rank_weighted", r.rank_weighted},
          {"top_k_curve", ScoreMap(r.top_k_curve)},
          {"class_top_k", class_scores},
          {"confusion", confusion},
          {"organ_match", Optional(r.organ_match)},
          {"gleason_match", Optional(r.gleason_match)},
          {"combined_match", Optional(r.combined_match)},
          {"rubric_mean", Optional(r.rubric_mean)},
          {"tests", tests}};
}

std::string ConfusionCsv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out.precision(17);
  out << "query_class";
  for (const auto& c : m.classes) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    out << m.classes[i];
    for (double v : m.m[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string DumpReport(const json& j) { return j.dump(2) + "\n"; }

}  // namespace simsearch::eval
