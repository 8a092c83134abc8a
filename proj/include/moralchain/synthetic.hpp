// Copyright 2026 The moralchain Authors.
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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "moralchain/dataset.hpp"

namespace moralchain {

// Deterministic MIC-shaped records for offline tests and dry runs. With the
// default n = 50 the set covers every judgment, every foundation and gold set
// cardinalities 1 to 3; a few rows carry partial or low agreement and every
// fifth row sits in the "dev" split.
std::vector<MicRecord> synthetic_dataset(std::size_t n = 50);

// CSV with header id,prompt,reply,rot,foundations,judgment,agreement,split.
// Foundations are '|'-separated names.
std::string records_to_csv(std::span<const MicRecord> records);

// Schema matching records_to_csv output.
ColumnSchema synthetic_schema();

}  // namespace moralchain
