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

#include "moralchain/corpus.hpp"

#include <nlohmann/json.hpp>
#include <optional>
#include <set>

#include "moralchain/error.hpp"
#include "moralchain/io.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

struct SentenceSplit {
  std::string_view before;
  std::string_view value;
};

// Matches `text` = before + lead + value + "." where value holds no period.
std::optional<SentenceSplit> split_final_sentence(std::string_view text, std::string_view lead) {
  const std::size_t at = text.rfind(lead);
  if (at == std::string_view::npos || !text::ends_with(text, ".")) return std::nullopt;
  const std::string_view value = text.substr(at + lead.size(), text.size() - at - lead.size() - 1);
  if (value.empty() || value.find('.') != std::string_view::npos) return std::nullopt;
  return SentenceSplit{text.substr(0, at), value};
}

bool canonical_foundation_list(std::string_view value) {
  try {
    return format_foundation_list(parse_foundations(value)) == value;
  } catch (const Error&) {
    return false;
  }
}

bool judgment_title_value(std::string_view value) {
  for (Judgment j : kAllJudgments) {
    if (value == judgment_title(j)) return true;
  }
  return false;
}

const std::string kMfcLead = " The moral foundations underlying the rule-of-thumb are ";
const std::string kMfcOursLead = " the moral foundations underlying the rule-of-thumb are ";
const std::string kSituationLead = " The moral foundations underlying this Prompt-Reply are ";
const std::string kJudgmentLead = " The moral judgment of the reply is ";

void check_chain(std::string_view chain_text, TaskKind task, std::vector<std::string>& reasons) {
  try {
    const InferenceChain chain = segment_chain(chain_text);
    if (task == TaskKind::kJoint && find_foundation_mentions(chain.step2).empty()) {
      reasons.emplace_back("NoFoundationInStep2");
    }
  } catch (const Error&) {
    reasons.emplace_back("MalformedChain");
  }
}

void check_target(const std::string& target, TaskKind task, Setting setting,
                  std::vector<std::string>& reasons) {
  const bool ours = setting == Setting::kOurs;
  switch (task) {
    case TaskKind::kMfc: {
      const auto s = split_final_sentence(target, ours ? kMfcOursLead : kMfcLead);
      if (!s || !canonical_foundation_list(s->value) || (!ours && !s->before.empty())) {
        reasons.emplace_back("TargetSentenceShape");
      } else if (ours) {
        check_chain(s->before, task, reasons);
      }
      break;
    }
    case TaskKind::kJudgment: {
      const auto s = split_final_sentence(target, kJudgmentLead);
      if (!s || !judgment_title_value(s->value) || (!ours && !s->before.empty())) {
        reasons.emplace_back("TargetSentenceShape");
      } else if (ours) {
        check_chain(s->before, task, reasons);
      }
      break;
    }
    case TaskKind::kJoint: {
      const auto s = split_final_sentence(target, kJudgmentLead);
      if (!s || !judgment_title_value(s->value)) {
        reasons.emplace_back("TargetSentenceShape");
        break;
      }
      if (ours) {
        check_chain(s->before, task, reasons);
        break;
      }
      const auto f = split_final_sentence(s->before, kSituationLead);
      if (!f || !f->before.empty() || !canonical_foundation_list(f->value)) {
        reasons.emplace_back("TargetSentenceShape");
      }
      break;
    }
  }
}

LineVerdict check_line(std::string_view line, std::size_t line_no, TaskKind task, Setting setting) {
  LineVerdict v;
  v.line = line_no;
  std::string input, target;
  try {
    const auto j = nlohmann::json::parse(line);
    v.id = j.at("id").get<std::string>();
    input = j.at("input").get<std::string>();
    target = j.at("target").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    v.reasons.emplace_back("MalformedLine");
    return v;
  }
  if (v.id.empty() || input.empty() || target.empty()) {
    v.reasons.emplace_back("MalformedLine");
    return v;
  }

  const std::size_t markers = text::count_occurrences(input + target, kInferenceMarker);
  if (setting == Setting::kOurs) {
    if (markers == 0) {
      v.reasons.emplace_back("MissingInferenceMarker");
    } else if (markers > 1) {
      v.reasons.emplace_back("DuplicateInferenceMarker");
    } else if (!text::ends_with(input, kInferenceMarker)) {
      v.reasons.emplace_back("MisplacedInferenceMarker");
    }
  } else if (markers > 0) {
    v.reasons.emplace_back("UnexpectedInferenceMarker");
  }

  const bool has_definitions = text::starts_with(input, definitions_paragraph());
  if (setting == Setting::kBase && input.find(definitions_paragraph()) != std::string::npos) {
    v.reasons.emplace_back("UnexpectedDefinitions");
  } else if (setting != Setting::kBase && !has_definitions) {
    v.reasons.emplace_back("MissingDefinitions");
  }

  check_target(target, task, setting, v.reasons);

  std::string_view before_marker = input;
  if (const auto at = input.find(kInferenceMarker); at != std::string::npos) {
    before_marker = before_marker.substr(0, at);
  }
  switch (task) {
    case TaskKind::kMfc:
      if (before_marker.find(kMfcAnchor) != std::string_view::npos) v.reasons.emplace_back("LeakCheck");
      break;
    case TaskKind::kJoint:
      if (before_marker.find(kSituationAnchor) != std::string_view::npos ||
          before_marker.find(kMfcAnchor) != std::string_view::npos) {
        v.reasons.emplace_back("LeakCheck");
      }
      break;
    case TaskKind::kJudgment:
      if (setting != Setting::kBase) {
        std::string head(before_marker);
        while (!head.empty() && text::is_space(head.back())) head.pop_back();
        const auto s = split_final_sentence(head, kSituationLead);
        if (!s || !canonical_foundation_list(s->value)) v.reasons.emplace_back("MissingGoldFoundations");
      }
      break;
  }
  return v;
}

}  // namespace

std::string CorpusCell::slug() const {
  return std::string(task_name(task)) + "_" + std::string(setting_name(setting)) + "_" +
         std::to_string(size_requested) + "_s" + std::to_string(seed);
}

std::string CorpusManifest::to_json_text() const {
  nlohmann::ordered_json j{{"task", task_name(cell.task)},
                           {"setting", setting_name(cell.setting)},
                           {"size_requested", cell.size_requested},
                           {"size_emitted", size_emitted},
                           {"seed", cell.seed},
                           {"skipped", skipped},
                           {"corpus_file", corpus_file},
                           {"sha256", sha256},
                           {"stats", nlohmann::ordered_json::parse(stats.to_json_text())}};
  return j.dump(2) + "\n";
}

CorpusManifest CorpusManifest::from_json_text(std::string_view json_text) {
  CorpusManifest m;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const auto task = task_from_name(j.at("task").get<std::string>());
    const auto setting = setting_from_name(j.at("setting").get<std::string>());
    if (!task || !setting) throw Error(ErrorCode::kInvalidArgument, "unknown task or setting");
    m.cell = {*task, *setting, j.at("size_requested").get<std::size_t>(), j.at("seed").get<std::uint64_t>()};
    m.size_emitted = j.at("size_emitted").get<std::size_t>();
    m.skipped = j.at("skipped").get<std::size_t>();
    m.corpus_file = j.at("corpus_file").get<std::string>();
    m.sha256 = j.at("sha256").get<std::string>();
    m.stats = DatasetStats::from_json_text(j.at("stats").dump());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad corpus manifest: ") + e.what());
  }
  return m;
}

CorpusSelection select_for_corpus(std::span<const MicRecord> queue, std::size_t n, Setting setting,
                                  const ChainMap& chains) {
  CorpusSelection sel;
  for (const auto& r : queue) {
    if (sel.records.size() >= n) break;
    if (setting == Setting::kOurs && !chains.contains(r.id)) {
      sel.skipped_ids.push_back(r.id);
      continue;
    }
    sel.records.push_back(r);
  }
  return sel;
}

std::string render_corpus(std::span<const MicRecord> records, TaskKind task, Setting setting,
                          const ChainMap& chains) {
  if (setting == Setting::kOurs) {
    std::string missing;
    std::size_t count = 0;
    for (const auto& r : records) {
      if (chains.contains(r.id)) continue;
      missing += (count++ ? ", " : "") + r.id;
    }
    if (count > 0) {
      throw Error(ErrorCode::kMissingChain,
                  std::to_string(count) + " record(s) without an inference chain: " + missing);
    }
  }
  std::string out;
  for (const auto& r : records) {
    std::optional<InferenceChain> chain;
    if (setting == Setting::kOurs) chain = chains.at(r.id);
    const SftRecord sft = build_sft_record(r, task, setting, chain);
    nlohmann::ordered_json j{{"id", sft.id}, {"input", sft.input}, {"target", sft.target}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& corpus) {
  std::filesystem::path p = corpus;
  p.replace_extension(".manifest.json");
  return p;
}

CorpusManifest emit_corpus(std::span<const MicRecord> records, const CorpusCell& cell,
                           const ChainMap& chains, const std::filesystem::path& out, std::size_t skipped) {
  const std::string content = render_corpus(records, cell.task, cell.setting, chains);
  write_file(out, content);
  CorpusManifest m;
  m.cell = cell;
  m.size_emitted = records.size();
  m.skipped = skipped;
  m.stats = compute_stats(records);
  m.sha256 = sha256_hex(content);
  m.corpus_file = out.filename().string();
  write_file(manifest_path_for(out), m.to_json_text());
  return m;
}

std::size_t ValidationReport::failures() const {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.ok() ? 0 : 1;
  return n;
}

std::string ValidationReport::to_jsonl() const {
  std::string out;
  for (const auto& l : lines) {
    nlohmann::ordered_json j{{"line", l.line}, {"id", l.id}, {"ok", l.ok()}, {"reasons", l.reasons}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

ValidationReport validate_corpus_text(std::string_view content, TaskKind task, Setting setting) {
  ValidationReport report;
  report.task = task;
  report.setting = setting;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    LineVerdict verdict = check_line(line, line_no, task, setting);
    if (!verdict.id.empty() && !seen.insert(verdict.id).second) verdict.reasons.emplace_back("DuplicateId");
    report.lines.push_back(std::move(verdict));
  }
  return report;
}

ValidationReport validate_corpus(const std::filesystem::path& path, TaskKind task, Setting setting) {
  return validate_corpus_text(read_file(path), task, setting);
}

}  // namespace moralchain
