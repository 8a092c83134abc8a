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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moralchain/chain.hpp"
#include "moralchain/dataset.hpp"

namespace moralchain {

enum class TaskKind { kMfc, kJudgment, kJoint };
enum class Setting { kBase, kBasePlus, kOurs };

inline constexpr TaskKind kAllTasks[] = {TaskKind::kMfc, TaskKind::kJudgment, TaskKind::kJoint};
inline constexpr Setting kAllSettings[] = {Setting::kBase, Setting::kBasePlus, Setting::kOurs};

std::string_view task_name(TaskKind t) noexcept;        // mfc | judgment | joint
std::string_view setting_name(Setting s) noexcept;      // base | base_plus | ours
std::string_view setting_label(Setting s) noexcept;     // base | base+ | ours
std::optional<TaskKind> task_from_name(std::string_view name) noexcept;
std::optional<Setting> setting_from_name(std::string_view name) noexcept;  // accepts base+ too

inline constexpr std::string_view kInferenceMarker = "###Inference:";
inline constexpr std::string_view kMfcAnchor = "underlying the rule-of-thumb are";
inline constexpr std::string_view kSituationAnchor = "underlying this Prompt-Reply are";
inline constexpr std::string_view kJudgmentAnchor = "The moral judgment of the reply is";

// Raw template resources, byte-identical to resources/templates/*.txt minus
// the final newline.
std::string_view teacher_template(TaskKind task) noexcept;
std::string_view sft_template(TaskKind task, Setting setting) noexcept;

// "There are six moral foundations. Care: ... holy."
const std::string& definitions_paragraph();

// Fills {slot} placeholders. Throws Error(kInvalidArgument) for an unknown or
// unterminated slot.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& slots);

std::string build_mfc_teacher_prompt(const MicRecord& record);
std::string build_judgment_teacher_prompt(const MicRecord& record);
std::string build_joint_teacher_prompt(const MicRecord& record);
std::string build_teacher_prompt(const MicRecord& record, TaskKind task);

struct SftRecord {
  std::string id;
  TaskKind task = TaskKind::kMfc;
  Setting setting = Setting::kBase;
  std::string input;
  std::string target;
  // The prompt the chain was generated from; present only for Setting::kOurs.
  std::optional<std::string> teacher_prompt;

  std::string text() const { return input + target; }
};

// The model-facing input for (task, setting); what a trained model is
// prompted with at evaluation time.
std::string build_sft_input(const MicRecord& record, TaskKind task, Setting setting);

// Throws Error(kMissingChain) when setting is ours and chain is absent,
// Error(kUnexpectedChain) when a chain is supplied for base or base+.
SftRecord build_sft_record(const MicRecord& record, TaskKind task, Setting setting,
                           const std::optional<InferenceChain>& chain);

}  // namespace moralchain
