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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moralchain/foundations.hpp"

namespace moralchain {

enum class Judgment : std::uint8_t { kAgree, kNeutral, kDisagree };

inline constexpr std::array<Judgment, 3> kAllJudgments{Judgment::kAgree, Judgment::kNeutral,
                                                       Judgment::kDisagree};

std::string_view judgment_name(Judgment j) noexcept;   // "agree"
std::string_view judgment_title(Judgment j) noexcept;  // "Agree"
// Accepts agree/neutral/disagree in any case, or the numeric codes 2/1/0.
std::optional<Judgment> judgment_from_label(std::string_view label) noexcept;

enum class Agreement : std::uint8_t { kFull, kPartial, kLow };

std::string_view agreement_name(Agreement a) noexcept;
std::optional<Agreement> agreement_from_label(std::string_view label) noexcept;

struct MicRecord {
  std::string id;
  std::string prompt;
  std::string reply;
  std::string rot;
  FoundationSet gold_foundations;
  Judgment gold_judgment = Judgment::kAgree;
  Agreement agreement = Agreement::kFull;
  std::string split = "train";

  friend bool operator==(const MicRecord&, const MicRecord&) = default;
};

// Returns an empty string when the record satisfies its invariants, otherwise
// a human-readable reason.
std::string record_violation(const MicRecord& record);

// Maps record fields to column headers. `agreement` and `split` are optional;
// when the agreement column is absent every row counts as full agreement.
// `delimiter` defaults from the file extension (tab for .tsv, comma otherwise).
struct ColumnSchema {
  std::string id = "id";
  std::string prompt = "prompt";
  std::string reply = "reply";
  std::string rot = "rot";
  std::string foundations = "foundations";
  std::string judgment = "judgment";
  std::optional<std::string> agreement = "agreement";
  std::optional<std::string> split;
  std::optional<char> delimiter;

  static ColumnSchema load(const std::filesystem::path& path);
  static ColumnSchema from_json_text(std::string_view json_text);
  std::string to_json_text() const;
};

struct RejectEntry {
  std::size_t row = 0;  // 1-based data row, header excluded
  std::string reason;
};

struct IngestResult {
  std::vector<MicRecord> records;
  std::vector<RejectEntry> rejects;
  bool agreement_defaulted = false;
};

// Throws Error(kUnreadableFile) or Error(kMissingColumn). Rows that violate
// record invariants become RejectEntry items with a "MalformedRow: ..." reason.
IngestResult ingest(const std::filesystem::path& path, const ColumnSchema& schema);
IngestResult ingest_text(std::string_view content, const ColumnSchema& schema, char delimiter);

// One {"row":..,"reason":..} object per line.
std::string rejects_to_jsonl(std::span<const RejectEntry> rejects);

std::vector<MicRecord> filter_full_agreement(std::span<const MicRecord> records);
std::vector<MicRecord> filter_split(std::span<const MicRecord> records, std::string_view split);

// Permutation of record indices used for all subset sampling under `seed`.
// Fisher-Yates over mt19937_64 with rejection-sampled bounds, so the order is
// identical across standard library implementations.
std::vector<std::size_t> sampling_order(std::size_t count, std::uint64_t seed);

// First min(n, |records|) records of the seeded order; when n >= |records| the
// input is returned unchanged. Samples for growing n under one seed are nested.
std::vector<MicRecord> sample_subset(std::span<const MicRecord> records, std::size_t n,
                                     std::uint64_t seed);

// The full candidate order behind sample_subset: identity when n >= |records|,
// otherwise the seeded permutation. Its first n entries are the sample and the
// remainder is the backfill queue.
std::vector<MicRecord> sampling_queue(std::span<const MicRecord> records, std::size_t n,
                                      std::uint64_t seed);

struct DatasetStats {
  std::size_t total = 0;
  // cardinality_histogram[i] counts records with |gold_foundations| == i; index 0 unused.
  std::array<std::size_t, kNumFoundations + 1> cardinality_histogram{};
  // Records whose gold set is exactly {f}.
  std::array<std::size_t, kNumFoundations> single_counts{};
  // Records whose gold set includes f.
  std::array<std::size_t, kNumFoundations> inclusion_counts{};

  double inclusion_proportion(Foundation f) const;
  double single_proportion(Foundation f) const;

  std::string to_json_text() const;
  static DatasetStats from_json_text(std::string_view json_text);

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(std::span<const MicRecord> records);

// Normalized record store, one JSON object per line.
std::string records_to_jsonl(std::span<const MicRecord> records);
std::vector<MicRecord> records_from_jsonl(std::string_view content);

}  // namespace moralchain
