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

#include "eval/metrics.hpp"

#include "common/error.hpp"

namespace simsearch::eval {

std::string_view LabelAxisName(LabelAxis axis) {
  switch (axis) {
    case LabelAxis::kFeature: return "feature";
    case LabelAxis::kOrgan: return "organ";
    case LabelAxis::kGleason: return "gleason";
  }
  return "?";
}

LabelAxis ParseLabelAxis(std::string_view name) {
  if (name == "feature") return LabelAxis::kFeature;
  if (name == "organ") return LabelAxis::kOrgan;
  if (name == "gleason") return LabelAxis::kGleason;
  Fail(ErrorCode::kInvalidArgument, "unknown label axis '" + std::string(name) + "'");
}

std::string_view MatchModeName(MatchMode mode) {
  return mode == MatchMode::kLenient ? "lenient" : "strict";
}

MatchMode ParseMatchMode(std::string_view name) {
  if (name == "lenient") return MatchMode::kLenient;
  if (name == "strict") return MatchMode::kStrict;
  Fail(ErrorCode::kInvalidArgument, "unknown match mode '" + std::string(name) + "'");
}

std::set<std::string> AxisLabels(const LabelSet& labels, LabelAxis axis) {
  switch (axis) {
    case LabelAxis::kFeature: return labels.histologic_features;
    case LabelAxis::kOrgan:
      return labels.organ ? std::set<std::string>{*labels.organ} : std::set<std::string>{};
    case LabelAxis::kGleason:
      return labels.gleason ? std::set<std::string>{std::string(GleasonName(*labels.gleason))}
                            : std::set<std::string>{};
  }
  return {};
}

std::optional<std::string> PrimaryLabel(const LabelSet& labels, LabelAxis axis) {
  auto all = AxisLabels(labels, axis);
  if (all.empty()) return std::nullopt;
  return *all.begin();
}

bool Matches(const LabelSet& query, const LabelSet& result, LabelAxis axis, MatchMode mode) {
  if (mode == MatchMode::kStrict) {
    auto q = PrimaryLabel(query, axis);
    return q && q == PrimaryLabel(result, axis);
  }
  const auto q = AxisLabels(query, axis);
  for (const auto& label : AxisLabels(result, axis)) {
    if (q.count(label)) return true;
  }
  return false;
}

namespace {

void CheckQuery(const RetrievalQuery& q, int k, LabelAxis axis) {
  Require(!AxisLabels(q.query.labels, axis).empty(), ErrorCode::kInvalidArgument,
          "query patch " + std::to_string(q.query.patch_id) + " has no " +
              std::string(LabelAxisName(axis)) + " label");
  Require(q.exhausted || q.results.size() >= static_cast<std::size_t>(k), ErrorCode::kInvalidArgument,
          "query patch " + std::to_string(q.query.patch_id) + " has fewer than " +
              std::to_string(k) + " results and is not flagged exhausted");
}

bool HitWithin(const RetrievalQuery& q, int k, LabelAxis axis, MatchMode mode) {
  const std::size_t n = std::min(q.results.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < n; ++r) {
    if (Matches(q.query.labels, q.results[r].labels, axis, mode)) return true;
  }
  return false;
}

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double TopKScore(const RetrievalRun& run, int k, LabelAxis axis, MatchMode mode) {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  std::size_t hits = 0;
  for (const auto& q : run.queries) {
    CheckQuery(q, k, axis);
    hits += HitWithin(q, k, axis, mode) ? 1 : 0;
  }
  return Ratio(hits, run.queries.size());
}

double ClassTopKScore(const RetrievalRun& run, const std::string& cls, int k, LabelAxis axis,
                      MatchMode mode) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& q : run.queries) {
    if (PrimaryLabel(q.query.labels, axis) != cls) continue;
    CheckQuery(q, k, axis);
    ++total;
    hits += HitWithin(q, k, axis, mode) ? 1 : 0;
  }
  return Ratio(hits, total);
}

double CombinedTopKScore(const RetrievalRun& run, int k, const std::vector<LabelAxis>& axes,
                         MatchMode mode) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& q : run.queries) {
    std::vector<LabelAxis> present;
    for (LabelAxis a : axes) {
      if (!AxisLabels(q.query.labels, a).empty()) present.push_back(a);
    }
    if (present.empty()) continue;
    ++total;
    const std::size_t n = std::min(q.results.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < n; ++r) {
      bool all = true;
      for (LabelAxis a : present) all = all && Matches(q.query.labels, q.results[r].labels, a, mode);
      if (all) {
        ++hits;
        break;
      }
    }
  }
  return Ratio(hits, total);
}

MetricVariants ComputeMetricVariants(const RetrievalRun& run, int k, LabelAxis axis, MatchMode mode) {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  MetricVariants v;
  // Integer numerators keep the rates independent of summation order.
  std::size_t matches = 0;
  std::size_t weighted = 0;
  std::map<int, std::size_t> curve_hits;
  for (const auto& q : run.queries) {
    CheckQuery(q, k, axis);
    const std::size_t n = std::min(q.results.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < n; ++r) {
      if (Matches(q.query.labels, q.results[r].labels, axis, mode)) {
        ++matches;
        weighted += static_cast<std::size_t>(k) - r;  // k - rank + 1 with rank = r + 1
      }
    }
    for (int kk = 1; kk <= 10; ++kk) curve_hits[kk] += HitWithin(q, kk, axis, mode) ? 1 : 0;
  }
  const std::size_t nq = run.queries.size();
  const auto ku = static_cast<std::size_t>(k);
  v.mean_match = Ratio(matches, nq * ku);
  v.rank_weighted = Ratio(weighted, nq * ku * (ku + 1) / 2);
  for (int kk = 1; kk <= 10; ++kk) v.top_k_curve[kk] = Ratio(curve_hits[kk], nq);
  return v;
}

ConfusionMatrix ComputeConfusion(const RetrievalRun& run, const std::vector<std::string>& classes,
                                 int k, LabelAxis axis, MatchMode mode) {
  ConfusionMatrix cm;
  cm.classes = classes;
  const std::size_t c = classes.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c; ++i) index[classes[i]] = i;
  std::vector<std::vector<std::size_t>> counts(c, std::vector<std::size_t>(c, 0));
  cm.row_counts.assign(c, 0);
  for (const auto& q : run.queries) {
    CheckQuery(q, k, axis);
    const auto primary = PrimaryLabel(q.query.labels, axis);
    auto it = index.find(*primary);
    Require(it != index.end(), ErrorCode::kInvalidArgument, "unknown class '" + *primary + "'");
    const std::size_t i = it->second;
    ++cm.row_counts[i];
    std::vector<bool> hit(c, false);
    const std::size_t n = std::min(q.results.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < n; ++r) {
      const auto& labels = q.results[r].labels;
      if (mode == MatchMode::kStrict) {
        if (auto p = PrimaryLabel(labels, axis); p && index.count(*p)) hit[index[*p]] = true;
      } else {
        for (const auto& l : AxisLabels(labels, axis)) {
          if (auto jt = index.find(l); jt != index.end()) hit[jt->second] = true;
        }
      }
    }
    for (std::size_t j = 0; j < c; ++j) counts[i][j] += hit[j] ? 1 : 0;
  }
  cm.m.assign(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) cm.m[i][j] = Ratio(counts[i][j], cm.row_counts[i]);
  }
  return cm;
}

std::vector<std::string> QueryClasses(const RetrievalRun& run, LabelAxis axis) {
  std::set<std::string> s;
  for (const auto& q : run.queries) {
    if (auto p = PrimaryLabel(q.query.labels, axis)) s.insert(*p);
  }
  return {s.begin(), s.end()};
}

}  // namespace simsearch::eval
