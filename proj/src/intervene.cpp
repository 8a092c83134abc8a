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

#include "moralchain/intervene.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

#include "moralchain/error.hpp"
#include "moralchain/prompts.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

using ojson = nlohmann::ordered_json;

// Text between two adjacent names that keeps them in one list.
bool is_connective(std::string_view gap) {
  std::size_t i = 0;
  while (i < gap.size()) {
    const char c = gap[i];
    if (text::is_space(c) || c == ',' || c == '&') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < gap.size() && text::is_word_char(gap[j])) ++j;
    if (j == i || text::to_lower(gap.substr(i, j - i)) != "and") return false;
    i = j;
  }
  return true;
}

ojson prediction_json(const Prediction& p) {
  ojson j{{"raw", p.raw}};
  j["foundations"] = p.foundations ? ojson(format_foundation_list(*p.foundations)) : ojson();
  j["judgment"] = p.judgment ? ojson(judgment_name(*p.judgment)) : ojson();
  return j;
}

}  // namespace

std::vector<FoundationRun> find_foundation_runs(std::string_view text) {
  std::vector<FoundationRun> runs;
  for (const auto& m : find_foundation_mentions(text)) {
    if (!runs.empty() && is_connective(text.substr(runs.back().end, m.begin - runs.back().end))) {
      runs.back().end = m.end;
      runs.back().set.insert(m.foundation);
      continue;
    }
    FoundationRun run{m.begin, m.end, {}};
    run.set.insert(m.foundation);
    runs.push_back(run);
  }
  return runs;
}

std::string splice_ground_truth(std::string_view step2, const FoundationSet& gold) {
  const auto runs = find_foundation_runs(step2);
  if (runs.empty()) throw Error(ErrorCode::kNoFoundationSpan, "step 2 names no moral foundation");
  FoundationSet named;
  for (const auto& r : runs) named = named.unite(r.set);
  if (named == gold) return std::string(step2);
  const std::string replacement = format_foundation_list(gold);
  std::string out;
  std::size_t pos = 0;
  for (const auto& r : runs) {
    out.append(step2.substr(pos, r.begin - pos));
    if (r.set == gold) {
      out.append(step2.substr(r.begin, r.end - r.begin));
    } else {
      out.append(replacement);
    }
    pos = r.end;
  }
  out.append(step2.substr(pos));
  return out;
}

InterventionOutcome run_intervention(CompletionClient& client, const MicRecord& record,
                                     const InterventionOptions& options) {
  const std::string input = build_sft_input(record, TaskKind::kJoint, Setting::kOurs);
  CompletionRequest request{options.endpoint_id, input, options.decoding};
  const std::string raw = client.complete(request);

  InterventionOutcome outcome;
  outcome.id = record.id;
  outcome.original = parse_prediction(record.id, raw, TaskKind::kJoint);
  const InferenceChain chain = segment_chain(raw);
  const std::string spliced = splice_ground_truth(chain.step2, record.gold_foundations);
  outcome.changed = spliced != chain.step2;

  const std::string prefix = input + " (1) " + chain.step1 + " (2) ";
  outcome.original_prompt = prefix + chain.step2 + " (3)";
  outcome.spliced_prompt = prefix + spliced + " (3)";

  request.prompt = outcome.spliced_prompt;
  const std::string continuation = client.complete(request);
  outcome.intervened =
      parse_prediction(record.id, outcome.spliced_prompt.substr(input.size()) + continuation, TaskKind::kJoint);
  return outcome;
}

InterventionRun run_interventions(CompletionClient& client, std::span<const MicRecord> records,
                                  const InterventionOptions& options, std::size_t max_in_flight) {
  std::vector<std::optional<InterventionOutcome>> slots(records.size());
  const auto errors = parallel_for(records.size(), max_in_flight, [&](std::size_t i) {
    slots[i] = run_intervention(client, records[i], options);
  });

  std::map<std::string, InterventionOutcome> outcomes;
  std::map<std::string, SkippedItem> skipped;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!errors[i]) {
      outcomes.emplace(records[i].id, std::move(*slots[i]));
      continue;
    }
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedChain && e.code() != ErrorCode::kNoFoundationSpan) throw;
      skipped.emplace(records[i].id, SkippedItem{records[i].id, std::string(e.code_name()), e.what()});
    }
  }
  InterventionRun run;
  for (auto& [id, o] : outcomes) run.outcomes.push_back(std::move(o));
  for (auto& [id, s] : skipped) run.skipped.push_back(std::move(s));
  return run;
}

InterventionSummary summarize_interventions(const InterventionRun& run, std::span<const MicRecord> golds) {
  std::map<std::string, const MicRecord*> by_id;
  for (const auto& g : golds) by_id.emplace(g.id, &g);
  std::vector<Prediction> original;
  std::vector<Prediction> intervened;
  std::vector<MicRecord> items;
  InterventionSummary s;
  for (const auto& o : run.outcomes) {
    auto it = by_id.find(o.id);
    if (it == by_id.end()) throw Error(ErrorCode::kMismatchedIds, "no gold record for " + o.id);
    items.push_back(*it->second);
    original.push_back(o.original);
    intervened.push_back(o.intervened);
    s.changed += o.changed ? 1 : 0;
  }
  s.items = items.size();
  s.skipped = run.skipped.size();
  s.original_accuracy = judgment_accuracy(original, items);
  s.intervened_accuracy = judgment_accuracy(intervened, items);
  return s;
}

std::string outcomes_to_jsonl(std::span<const InterventionOutcome> outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    ojson j{{"id", o.id},
            {"changed", o.changed},
            {"original", prediction_json(o.original)},
            {"original_prompt", o.original_prompt},
            {"spliced_prompt", o.spliced_prompt},
            {"intervened", prediction_json(o.intervened)}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string skipped_to_jsonl(std::span<const SkippedItem> skipped) {
  std::string out;
  for (const auto& s : skipped) {
    out += ojson{{"id", s.id}, {"error", s.error}, {"message", s.message}}.dump() + "\n";
  }
  return out;
}

}  // namespace moralchain
