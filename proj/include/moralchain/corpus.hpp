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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moralchain/chain.hpp"
#include "moralchain/dataset.hpp"
#include "moralchain/prompts.hpp"

namespace moralchain {

using ChainMap = std::map<std::string, InferenceChain>;

struct CorpusCell {
  TaskKind task = TaskKind::kMfc;
  Setting setting = Setting::kBase;
  std::size_t size_requested = 0;
  std::uint64_t seed = 1;

  // e.g. "mfc_base_plus_5000_s1"
  std::string slug() const;
};

struct CorpusManifest {
  CorpusCell cell;
  std::size_t size_emitted = 0;
  std::size_t skipped = 0;
  DatasetStats stats;
  std::string sha256;
  std::string corpus_file;  // file name, relative to the manifest

  std::string to_json_text() const;
  static CorpusManifest from_json_text(std::string_view json_text);
};

struct CorpusSelection {
  std::vector<MicRecord> records;
  // Records passed over because they had no chain (ours only).
  std::vector<std::string> skipped_ids;
};

// Walks `queue` in order and keeps the first n usable records. For the ours
// setting a record is usable only if it has a chain, so failed generations
// are backfilled from later queue entries.
CorpusSelection select_for_corpus(std::span<const MicRecord> queue, std::size_t n, Setting setting,
                                  const ChainMap& chains);

// Renders one SftRecord per line (keys id, input, target) in `records` order.
// Throws Error(kMissingChain) listing every record without a chain when the
// setting is ours.
std::string render_corpus(std::span<const MicRecord> records, TaskKind task, Setting setting,
                          const ChainMap& chains);

// Writes the JSONL corpus to `out` and its manifest next to it (see
// manifest_path_for). Errors: kMissingChain, kIoFailure.
CorpusManifest emit_corpus(std::span<const MicRecord> records, const CorpusCell& cell,
                           const ChainMap& chains, const std::filesystem::path& out,
                           std::size_t skipped = 0);

std::filesystem::path manifest_path_for(const std::filesystem::path& corpus);

struct LineVerdict {
  std::size_t line = 0;  // 1-based
  std::string id;
  std::vector<std::string> reasons;

  bool ok() const { return reasons.empty(); }
};

struct ValidationReport {
  TaskKind task = TaskKind::kMfc;
  Setting setting = Setting::kBase;
  std::vector<LineVerdict> lines;

  std::size_t failures() const;
  std::string to_jsonl() const;
};

// Re-checks each line against the template grammar of (task, setting).
// Failure reasons: MalformedLine, MissingInferenceMarker,
// UnexpectedInferenceMarker, DuplicateInferenceMarker, MisplacedInferenceMarker,
// MalformedChain, MissingDefinitions, UnexpectedDefinitions,
// TargetSentenceShape, MissingGoldFoundations, NoFoundationInStep2, LeakCheck, DuplicateId.
ValidationReport validate_corpus_text(std::string_view content, TaskKind task, Setting setting);
// Throws Error(kUnreadableFile).
ValidationReport validate_corpus(const std::filesystem::path& path, TaskKind task, Setting setting);

}  // namespace moralchain
