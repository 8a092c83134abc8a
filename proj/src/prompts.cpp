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

#include "moralchain/prompts.hpp"

#include <algorithm>

#include "moralchain/error.hpp"
#include "templates_data.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

bool ends_sentence(std::string_view s) {
  return !s.empty() && (s.back() == '.' || s.back() == '?' || s.back() == '!');
}

std::string_view split_anchor(TaskKind task, Setting setting) {
  if (setting == Setting::kOurs) return kInferenceMarker;
  switch (task) {
    case TaskKind::kMfc: return " The moral foundations underlying the rule-of-thumb";
    case TaskKind::kJudgment: return " The moral judgment of the reply is";
    case TaskKind::kJoint: return " The moral foundations underlying this Prompt-Reply";
  }
  return kInferenceMarker;
}

using Slots = std::vector<std::pair<std::string, std::string>>;

Slots record_slots(const MicRecord& r) {
  const std::string foundations = format_foundation_list(r.gold_foundations);
  return {
      {"RoT", r.rot},
      {"prompt", r.prompt},
      {"reply", r.reply},
      {"DEFINITIONS", definitions_block()},
      {"Definition of moral foundations", definitions_paragraph()},
      {"MFs", foundations},
      {"moral foundations", foundations},
      {"moral foundation", foundations},
      {"Judgment", std::string(judgment_title(r.gold_judgment))},
      {"judgment", std::string(judgment_title(r.gold_judgment))},
  };
}

}  // namespace

std::string_view task_name(TaskKind t) noexcept {
  switch (t) {
    case TaskKind::kMfc: return "mfc";
    case TaskKind::kJudgment: return "judgment";
    case TaskKind::kJoint: return "joint";
  }
  return "mfc";
}

std::string_view setting_name(Setting s) noexcept {
  switch (s) {
    case Setting::kBase: return "base";
    case Setting::kBasePlus: return "base_plus";
    case Setting::kOurs: return "ours";
  }
  return "base";
}

std::string_view setting_label(Setting s) noexcept {
  return s == Setting::kBasePlus ? "base+" : setting_name(s);
}

std::optional<TaskKind> task_from_name(std::string_view name) noexcept {
  for (TaskKind t : kAllTasks) {
    if (name == task_name(t)) return t;
  }
  return std::nullopt;
}

std::optional<Setting> setting_from_name(std::string_view name) noexcept {
  for (Setting s : kAllSettings) {
    if (name == setting_name(s) || name == setting_label(s)) return s;
  }
  return std::nullopt;
}

std::string_view teacher_template(TaskKind task) noexcept {
  switch (task) {
    case TaskKind::kMfc: return resources::k_mfc_teacher;
    case TaskKind::kJudgment: return resources::k_judgment_teacher;
    case TaskKind::kJoint: return resources::k_joint_teacher;
  }
  return {};
}

std::string_view sft_template(TaskKind task, Setting setting) noexcept {
  using namespace resources;
  switch (task) {
    case TaskKind::kMfc:
      return setting == Setting::kBase       ? k_sft_mfc_base
             : setting == Setting::kBasePlus ? k_sft_mfc_base_plus
                                             : k_sft_mfc_ours;
    case TaskKind::kJudgment:
      return setting == Setting::kBase       ? k_sft_judgment_base
             : setting == Setting::kBasePlus ? k_sft_judgment_base_plus
                                             : k_sft_judgment_ours;
    case TaskKind::kJoint:
      return setting == Setting::kBase       ? k_sft_joint_base
             : setting == Setting::kBasePlus ? k_sft_joint_base_plus
                                             : k_sft_joint_ours;
  }
  return {};
}

const std::string& definitions_paragraph() {
  static const std::string paragraph = "There are six moral foundations. " + definitions_block();
  return paragraph;
}

std::string render_template(std::string_view tmpl, const Slots& slots) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "unterminated template slot");
    }
    const std::string_view name = tmpl.substr(i + 1, close - i - 1);
    const auto it = std::find_if(slots.begin(), slots.end(),
                                 [&](const auto& kv) { return kv.first == name; });
    if (it == slots.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no value for template slot {" + std::string(name) + "}");
    }
    out += it->second;
    i = close + 1;
    if (i < tmpl.size() && tmpl[i] == '.' && ends_sentence(it->second)) ++i;
  }
  return out;
}

std::string build_mfc_teacher_prompt(const MicRecord& record) {
  return render_template(teacher_template(TaskKind::kMfc), record_slots(record));
}

std::string build_judgment_teacher_prompt(const MicRecord& record) {
  return render_template(teacher_template(TaskKind::kJudgment), record_slots(record));
}

std::string build_joint_teacher_prompt(const MicRecord& record) {
  return render_template(teacher_template(TaskKind::kJoint), record_slots(record));
}

std::string build_teacher_prompt(const MicRecord& record, TaskKind task) {
  return render_template(teacher_template(task), record_slots(record));
}

std::string build_sft_input(const MicRecord& record, TaskKind task, Setting setting) {
  const std::string_view tmpl = sft_template(task, setting);
  const std::string_view anchor = split_anchor(task, setting);
  std::size_t cut = tmpl.find(anchor);
  if (setting == Setting::kOurs) cut += anchor.size();
  return render_template(tmpl.substr(0, cut), record_slots(record));
}

SftRecord build_sft_record(const MicRecord& record, TaskKind task, Setting setting,
                           const std::optional<InferenceChain>& chain) {
  if (setting == Setting::kOurs && !chain) {
    throw Error(ErrorCode::kMissingChain, "no inference chain for record " + record.id);
  }
  if (setting != Setting::kOurs && chain) {
    throw Error(ErrorCode::kUnexpectedChain,
                "inference chain supplied for " + std::string(setting_label(setting)) +
                    " record " + record.id);
  }
  const std::string_view tmpl = sft_template(task, setting);
  const std::string_view anchor = split_anchor(task, setting);
  std::size_t cut = tmpl.find(anchor);
  if (setting == Setting::kOurs) cut += anchor.size();

  Slots slots = record_slots(record);
  if (chain) slots.emplace_back("inference", chain->render());

  SftRecord out;
  out.id = record.id;
  out.task = task;
  out.setting = setting;
  out.input = render_template(tmpl.substr(0, cut), slots);
  out.target = render_template(tmpl.substr(cut), slots);
  if (setting == Setting::kOurs) out.teacher_prompt = build_teacher_prompt(record, task);
  return out;
}

}  // namespace moralchain
