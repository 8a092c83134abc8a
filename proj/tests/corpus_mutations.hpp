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

#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "moralchain/corpus.hpp"
#include "moralchain/synthetic.hpp"

namespace fixtures {

using namespace moralchain;

// Chains naming the gold set in steps 2 and 3, for every synthetic record.
inline ChainMap gold_chains(std::span<const MicRecord> records) {
  ChainMap chains;
  for (const auto& r : records) {
    const std::string list = format_foundation_list(r.gold_foundations);
    chains.emplace(r.id, make_chain("The Reply says the plan will not work.",
                                    "The conclusion is relevant to " + list + " by their definitions.",
                                    "The conclusion upholds " + list + "."));
  }
  return chains;
}

// A corpus-line mutation with the one validation reason it must trigger.
struct CorpusMutation {
  std::string name;
  TaskKind task;
  Setting setting;
  std::string reason;
  // Receives the parsed line and the id of the previous line.
  std::function<std::string(nlohmann::ordered_json, const std::string&)> apply;
};

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(); }

inline std::vector<CorpusMutation> corpus_mutations() {
  const std::string marker(kInferenceMarker);
  const std::string mfc_lead = " The moral foundations underlying the rule-of-thumb are ";
  std::vector<CorpusMutation> m;
  m.push_back({"marker_removed", TaskKind::kMfc, Setting::kOurs, "MissingInferenceMarker",
               [=](auto j, const std::string&) {
                 std::string in = j["input"];
                 j["input"] = in.substr(0, in.size() - marker.size());
                 return dump(j);
               }});
  m.push_back({"marker_doubled", TaskKind::kMfc, Setting::kOurs, "DuplicateInferenceMarker",
               [=](auto j, const std::string&) {
                 j["target"] = " " + marker + j["target"].template get<std::string>();
                 return dump(j);
               }});
  m.push_back({"marker_moved", TaskKind::kJudgment, Setting::kOurs, "MisplacedInferenceMarker",
               [=](auto j, const std::string&) {
                 std::string in = j["input"];
                 j["input"] = in.substr(0, in.size() - marker.size());
                 j["target"] = " " + marker + j["target"].template get<std::string>();
                 return dump(j);
               }});
  m.push_back({"marker_in_base", TaskKind::kMfc, Setting::kBase, "UnexpectedInferenceMarker",
               [=](auto j, const std::string&) {
                 j["input"] = j["input"].template get<std::string>() + " " + marker;
                 return dump(j);
               }});
  m.push_back({"definitions_dropped", TaskKind::kJoint, Setting::kBasePlus, "MissingDefinitions",
               [](auto j, const std::string&) {
                 j["input"] = j["input"].template get<std::string>().substr(definitions_paragraph().size() + 1);
                 return dump(j);
               }});
  m.push_back({"definitions_added", TaskKind::kJudgment, Setting::kBase, "UnexpectedDefinitions",
               [](auto j, const std::string&) {
                 j["input"] = definitions_paragraph() + " " + j["input"].template get<std::string>();
                 return dump(j);
               }});
  m.push_back({"step_marker_broken", TaskKind::kMfc, Setting::kOurs, "MalformedChain",
               [](auto j, const std::string&) {
                 std::string t = j["target"];
                 t.replace(t.find("(2)"), 3, "(x)");
                 j["target"] = t;
                 return dump(j);
               }});
  m.push_back({"unknown_foundation", TaskKind::kMfc, Setting::kBase, "TargetSentenceShape",
               [=](auto j, const std::string&) {
                 j["target"] = mfc_lead + "kindness.";
                 return dump(j);
               }});
  m.push_back({"step2_without_foundation", TaskKind::kJoint, Setting::kOurs, "NoFoundationInStep2",
               [](auto j, const std::string&) {
                 j["target"] = " (1) The Reply explains a design. (2) The conclusion is plain. (3) It is fine. "
                               "The moral judgment of the reply is Agree.";
                 return dump(j);
               }});
  m.push_back({"answer_in_input", TaskKind::kMfc, Setting::kBase, "LeakCheck",
               [=](auto j, const std::string&) {
                 j["input"] = j["input"].template get<std::string>() + mfc_lead + "care.";
                 return dump(j);
               }});
  m.push_back({"gold_foundations_dropped", TaskKind::kJudgment, Setting::kBasePlus, "MissingGoldFoundations",
               [](auto j, const std::string&) {
                 std::string in = j["input"];
                 j["input"] = in.substr(0, in.find(" The moral foundations underlying this Prompt-Reply"));
                 return dump(j);
               }});
  m.push_back({"not_json", TaskKind::kJudgment, Setting::kBase, "MalformedLine",
               [](auto j, const std::string&) { return "{" + dump(j); }});
  m.push_back({"repeated_id", TaskKind::kJoint, Setting::kBase, "DuplicateId",
               [](auto j, const std::string& previous) {
                 j["id"] = previous;
                 return dump(j);
               }});
  return m;
}

// Rewrites the given 1-based lines of `corpus` with `mutation`.
inline std::string mutate_lines(const std::string& corpus, const CorpusMutation& mutation,
                                const std::vector<std::size_t>& lines) {
  std::vector<std::string> rows;
  std::size_t start = 0;
  while (start < corpus.size()) {
    const std::size_t end = corpus.find('\n', start);
    rows.push_back(corpus.substr(start, end - start));
    start = end + 1;
  }
  for (std::size_t line : lines) {
    const auto previous = nlohmann::ordered_json::parse(rows.at(line - 2))["id"].get<std::string>();
    rows.at(line - 1) = mutation.apply(nlohmann::ordered_json::parse(rows.at(line - 1)), previous);
  }
  std::string out;
  for (const auto& r : rows) out += r + "\n";
  return out;
}

}  // namespace fixtures
