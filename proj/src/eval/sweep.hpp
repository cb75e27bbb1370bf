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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eval/report.hpp"

namespace simsearch::eval {

struct SweepPoint {
  std::optional<Magnification> magnification;
  std::optional<std::size_t> db_size;  // database patches per class
  int k = 5;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepGrid {
  std::vector<Magnification> magnifications;  // empty = not swept
  std::vector<std::size_t> db_sizes;          // empty = not swept
  std::vector<int> ks{5};
};

// Cartesian product in (magnification, db_size ascending, k ascending) order.
std::vector<SweepPoint> ExpandGrid(const SweepGrid& grid);

struct SweepEntry {
  SweepPoint point;
  EvalReport report;
};

// Evaluates every grid point with `evaluate`, tagging reports with the point.
std::vector<SweepEntry> RunSweep(const SweepGrid& grid,
                                 const std::function<EvalReport(const SweepPoint&)>& evaluate);

// One row per point: magnification, db_size, k, top-k score, mean match,
// rank weighted. Unswept columns hold "-".
std::string SweepTsv(const std::vector<SweepEntry>& entries);
json ToJson(const SweepPoint& p);

}  // namespace simsearch::eval
