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

#include <cstdint>

#include "index/shard_set.hpp"
#include "query/query_types.hpp"

namespace simsearch::query {

// k distinct patches drawn uniformly without replacement, subject to the same
// exclusions and diversity rule as engine results. Deterministic per seed.
// Throws kUnderflow when fewer than k patches survive.
std::vector<QueryResult> RandomResults(const index::ShardSet& db, const QuerySpec& spec,
                                       std::uint64_t seed);

}  // namespace simsearch::query
