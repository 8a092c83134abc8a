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

#include "moralchain/stub_models.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "moralchain/error.hpp"
#include "moralchain/evalkit.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

std::optional<std::string_view> between(std::string_view text, std::string_view open, std::string_view close) {
  const auto a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return text.substr(a + open.size(), b - a - open.size());
}

std::string_view first_line(std::string_view text) { return text.substr(0, text.find('\n')); }

Judgment stated_judgment(std::string_view prompt) {
  const auto label = between(prompt, "The moral judgment of the Reply is ", ".");
  if (!label) throw Error(ErrorCode::kEndpointRejected, "stub teacher: no judgment in prompt");
  const auto j = judgment_from_label(text::trim(*label));
  if (!j) throw Error(ErrorCode::kEndpointRejected, "stub teacher: unknown judgment");
  return *j;
}

FoundationSet stated_foundations(std::string_view prompt, std::string_view open, std::string_view close) {
  const auto span = between(prompt, open, close);
  if (!span) throw Error(ErrorCode::kEndpointRejected, "stub teacher: no foundations in prompt");
  return parse_foundations(*span);
}

std::string_view verdict_verb(Judgment j) {
  switch (j) {
    case Judgment::kAgree:
      return "upholds";
    case Judgment::kDisagree:
      return "violates";
    case Judgment::kNeutral:
      break;
  }
  return "neither clearly upholds nor violates";
}

FoundationSet wrong_set(const FoundationSet& gold, std::uint64_t h) {
  FoundationSet out = gold;
  const auto members = gold.to_vector();
  if (members.size() > 1 && (h & 1U) != 0) {
    out.erase(members[(h >> 1) % members.size()]);
    return out;
  }
  std::vector<Foundation> others;
  for (Foundation f : canonical_foundations()) {
    if (!gold.contains(f)) others.push_back(f);
  }
  if (others.empty()) {
    out.erase(members.front());
    return out;
  }
  out.erase(members[(h >> 1) % members.size()]);
  out.insert(others[(h >> 9) % others.size()]);
  return out;
}

Judgment wrong_judgment(Judgment gold, std::uint64_t h) {
  const auto g = static_cast<std::size_t>(gold);
  return kAllJudgments[(g + 1 + h % 2) % 3];
}

std::string judgment_sentence(Judgment j) {
  return "The moral judgment of the reply is " + std::string(judgment_title(j)) + ".";
}

constexpr std::string_view kJointStep3 = "The conclusion of the Reply is weighed against those foundations.";

}  // namespace

std::uint64_t stable_hash(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // Final avalanche so nearby keys spread over the whole range.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

double stable_unit(std::string_view text) noexcept {
  return static_cast<double>(stable_hash(text) >> 11) * 0x1.0p-53;
}

std::string StubTeacherBackend::send(const CompletionRequest& request) {
  const std::string_view prompt = request.prompt;
  if (options_.failure_rate > 0.0 &&
      stable_unit(request.prompt + "|" + std::to_string(request.params.temperature)) < options_.failure_rate) {
    return "The answer is not broken into steps this time.";
  }
  const std::string_view head = first_line(prompt);
  if (text::starts_with(head, "Input: There is a rule of thumb (RoT): ")) {
    const auto gold = stated_foundations(prompt, "relevant to the MFs ", " by referring");
    const std::string list = format_foundation_list(gold);
    return "(1) The rule of thumb passes a Judgment on an Action, and the Action is the behavior it names. "
           "(2) If the Action is carried out, the people involved would feel its consequence. "
           "(3) The consequence is relevant to the MFs " +
           list + " because it touches what their DEFINITIONS protect.";
  }
  if (text::starts_with(head, "Input: There is a Prompt-Reply pair: ")) {
    const auto gold = stated_foundations(prompt, "underlying this Prompt-Reply are ", ".\n");
    const Judgment j = stated_judgment(prompt);
    const std::string list = format_foundation_list(gold);
    return "(1) The moral foundations " + list + " are read through their definitions. "
           "(2) The Reply draws a conclusion about the situation in the Prompt. "
           "(3) The judgment is " +
           std::string(judgment_title(j)) + " because the conclusion of the Reply " + std::string(verdict_verb(j)) +
           " " + list + ".";
  }
  if (text::starts_with(head, "Input: There are six moral foundations")) {
    const auto gold = stated_foundations(prompt, "associated to the moral foundations ", " by referring");
    const Judgment j = stated_judgment(prompt);
    const std::string list = format_foundation_list(gold);
    return "(1) Based on the Prompt, the Reply concludes that the situation calls for a response. "
           "(2) The conclusion is relevant to moral foundations " +
           list + " because it explains how the Reply treats the people involved. (3) The judgment is " +
           std::string(judgment_title(j)) + " because the conclusion of the Reply " + std::string(verdict_verb(j)) +
           " the moral foundations of the " + list + ".";
  }
  throw Error(ErrorCode::kEndpointRejected, "stub teacher: unrecognized prompt");
}

StubModelBackend::StubModelBackend(std::vector<MicRecord> records, StubModelOptions options)
    : records_(std::move(records)), options_(options) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (TaskKind t : kAllTasks) {
      for (Setting s : kAllSettings) inputs_.emplace(build_sft_input(records_[i], t, s), Entry{i, t, s});
    }
  }
}

double StubModelBackend::error_rate(Setting setting) const {
  switch (setting) {
    case Setting::kBase:
      return options_.base_error;
    case Setting::kBasePlus:
      return options_.base_plus_error;
    case Setting::kOurs:
      break;
  }
  return options_.ours_error;
}

std::string StubModelBackend::send(const CompletionRequest& request) {
  const std::string_view prompt = request.prompt;
  auto it = inputs_.find(prompt);
  std::string_view tail;
  if (it == inputs_.end()) {
    const auto marker = prompt.find(kInferenceMarker);
    if (marker != std::string_view::npos) {
      const auto cut = marker + kInferenceMarker.size();
      it = inputs_.find(prompt.substr(0, cut));
      tail = prompt.substr(cut);
    }
  }
  if (it == inputs_.end()) throw Error(ErrorCode::kEndpointRejected, "stub model: unrecognized prompt");
  const Entry& e = it->second;
  const MicRecord& r = records_[e.record];
  const std::string key = request.endpoint_id + "|" + r.id + "|" + std::string(task_name(e.task)) + "|" +
                          std::string(setting_name(e.setting)) + "|";
  const double err = error_rate(e.setting);
  const FoundationSet fs =
      stable_unit(key + "mf") < err ? wrong_set(r.gold_foundations, stable_hash(key + "mf-alt")) : r.gold_foundations;
  const Judgment wrong_j = wrong_judgment(r.gold_judgment, stable_hash(key + "j-alt"));
  const Judgment j = stable_unit(key + "j") < err ? wrong_j : r.gold_judgment;
  const bool prose = e.setting == Setting::kOurs && stable_unit(key + "prose") < options_.malformed_rate;
  const std::string list = format_foundation_list(fs);

  if (e.task == TaskKind::kJoint && e.setting == Setting::kOurs) {
    if (!tail.empty()) {
      // Continuation of a prompt that ends at "(3)".
      FoundationSet named;
      try {
        named = parse_foundations(segment_chain(std::string(tail) + " x").step2);
      } catch (const Error&) {
      }
      const Judgment cj = named == r.gold_foundations ? r.gold_judgment : wrong_j;
      return " " + std::string(kJointStep3) + " " + judgment_sentence(cj);
    }
    const Judgment oj = fs == r.gold_foundations ? r.gold_judgment : wrong_j;
    if (prose) return " The reply is about " + list + ". " + judgment_sentence(oj);
    return " (1) Based on the Prompt, the Reply concludes that the situation calls for a response. "
           "(2) The conclusion is relevant to moral foundations " +
           list + " because it explains how the Reply treats the people involved. (3) " + std::string(kJointStep3) +
           " " + judgment_sentence(oj);
  }

  switch (e.task) {
    case TaskKind::kMfc:
      if (e.setting != Setting::kOurs) return " The moral foundations underlying the rule-of-thumb are " + list + ".";
      if (prose) return " It is about " + list + ".";
      return " (1) The rule of thumb passes a Judgment on an Action. (2) Carrying out the Action affects the people "
             "involved. (3) The consequence is relevant to " +
             list + " by their definitions. the moral foundations underlying the rule-of-thumb are " + list + ".";
    case TaskKind::kJudgment:
      if (e.setting != Setting::kOurs) return " " + judgment_sentence(j);
      if (prose) return " It depends. " + judgment_sentence(j);
      return " (1) The named moral foundations are read through their definitions. (2) The Reply draws a "
             "conclusion about the Prompt. (3) The conclusion " +
             std::string(verdict_verb(j)) + " those foundations. " + judgment_sentence(j);
    case TaskKind::kJoint:
      break;
  }
  return " The moral foundations underlying this Prompt-Reply are " + list + ". " + judgment_sentence(j);
}

std::vector<double> StubScoringBackend::score(const ScoreRequest& request) {
  std::vector<std::string_view> tokens;
  const std::string_view text = request.text;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text::is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !text::is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  std::vector<double> out(tokens.size(), 0.0);
  const auto windows = sliding_windows(tokens.size(), static_cast<std::size_t>(std::max(1, request.window)),
                                       static_cast<std::size_t>(std::max(1, request.stride)));
  for (const auto& w : windows) {
    for (std::size_t t = w.score_begin; t < w.end; ++t) {
      const double context = static_cast<double>(std::min<std::size_t>(t - w.begin, 64));
      const double base = 0.25 + 4.0 * stable_unit(request.endpoint_id + "|" + text::to_lower(tokens[t]));
      out[t] = -base * (1.0 - 0.3 * context / 64.0);
    }
  }
  return out;
}

}  // namespace moralchain
