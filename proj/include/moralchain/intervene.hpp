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

// Ground-truth splicing of step-2 foundations and the regeneration harness.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moralchain/chain.hpp"
#include "moralchain/dataset.hpp"
#include "moralchain/evalkit.hpp"
#include "moralchain/teacher.hpp"

namespace moralchain {

// A maximal run of foundation names joined by "," / "and" / whitespace.
struct FoundationRun {
  std::size_t begin = 0;
  std::size_t end = 0;
  FoundationSet set;
};

std::vector<FoundationRun> find_foundation_runs(std::string_view text);

// Replaces every run whose set differs from `gold` with
// format_foundation_list(gold). Returns `step2` unchanged when the runs
// already name exactly `gold`. Throws Error(kNoFoundationSpan).
std::string splice_ground_truth(std::string_view step2, const FoundationSet& gold);

struct InterventionOutcome {
  std::string id;
  Prediction original;
  std::string original_prompt;  // input + "(1) .. (2) <original step 2> (3)"
  std::string spliced_prompt;   // same with the spliced step 2
  Prediction intervened;
  bool changed = false;         // step-2 foundations differed from gold
};

struct InterventionOptions {
  std::string endpoint_id = "model";
  DecodingParams decoding;
};

// Completes the joint/ours input, splices step 2 and completes the prompt
// ending at "(3)". Errors: kMalformedChain, kNoFoundationSpan, client errors.
InterventionOutcome run_intervention(CompletionClient& client, const MicRecord& record,
                                     const InterventionOptions& options);

struct SkippedItem {
  std::string id;
  std::string error;  // error code name
  std::string message;
};

struct InterventionRun {
  std::vector<InterventionOutcome> outcomes;  // ordered by record id
  std::vector<SkippedItem> skipped;           // ordered by record id
};

// Runs every record with bounded parallelism. Items failing with
// kMalformedChain or kNoFoundationSpan are skipped; other errors propagate.
InterventionRun run_interventions(CompletionClient& client, std::span<const MicRecord> records,
                                  const InterventionOptions& options, std::size_t max_in_flight);

// Accuracies over the outcomes (the identical item set for both sides).
InterventionSummary summarize_interventions(const InterventionRun& run, std::span<const MicRecord> golds);

std::string outcomes_to_jsonl(std::span<const InterventionOutcome> outcomes);
std::string skipped_to_jsonl(std::span<const SkippedItem> skipped);

}  // namespace moralchain
