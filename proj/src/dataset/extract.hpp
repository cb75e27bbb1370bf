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

#include "core_model/types.hpp"
#include "dataset/annotations.hpp"
#include "dataset/slide_store.hpp"

namespace simsearch::dataset {

struct ExtractOptions {
  std::vector<Magnification> magnifications{Magnification::k10X};
  int side_px = kDefaultPatchSide;
  int stride_px = 0;                 // level pixels; 0 means side_px (no overlap)
  double coverage_threshold = 0.75;  // fraction of patch area inside a label's polygons
  bool keep_unlabeled = false;       // true for serving databases
  std::size_t threads = 1;
};

// Grid-aligned patches at each requested level, labeled from the annotation
// polygons. patch_id is dense and follows (slide_id, magnification, y, x).
std::vector<PatchRecord> ExtractPatches(const SlideStore& store,
                                        const std::vector<AnnotationRegion>& annotations,
                                        const ExtractOptions& options);

void WritePatchTable(const std::filesystem::path& path, const std::vector<PatchRecord>& patches);
std::vector<PatchRecord> ReadPatchTable(const std::filesystem::path& path);

}  // namespace simsearch::dataset
