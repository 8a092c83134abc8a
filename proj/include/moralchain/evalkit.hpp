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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moralchain/dataset.hpp"
#include "moralchain/prompts.hpp"

namespace moralchain {

struct Prediction {
  std::string id;
  std::string raw;
  std::optional<FoundationSet> foundations;
  std::optional<Judgment> judgment;

  bool scorable() const { return foundations.has_value() || judgment.has_value(); }
};

// Parses a generated answer. Only text after the last "###Inference:" marker
// is considered. Foundations come from the first sentence after the last
// "underlying the rule-of-thumb are" / "underlying this" anchor (mfc, joint);
// joint answers without an anchor fall back to step 2 of the chain. The
// judgment is the first agree/neutral/disagree word after the last "The moral
// judgment of the reply is" (judgment, joint). Without anchors the whole
// answer is scanned. Never throws; unparsable fields stay empty.
Prediction parse_prediction(std::string id, std::string_view raw, TaskKind task);

// Reads {"id":..,"raw":..} lines. Throws Error(kMalformedRow).
std::vector<std::pair<std::string, std::string>> read_predictions_jsonl(std::string_view content);
std::string predictions_to_jsonl(std::span<const Prediction> predictions);

enum class ScoringMode {
  kExactSet,  // credit 1 iff predicted set == gold set
  kPerLabel,  // Jaccard overlap |P ∩ G| / |P ∪ G|
};

struct StratumScore {
  std::size_t items = 0;
  double credit = 0.0;

  std::optional<double> accuracy() const {
    if (items == 0) return std::nullopt;
    return credit / static_cast<double>(items);
  }
};

inline constexpr std::size_t kReportedStrata = 3;

struct MfcAccuracy {
  // strata[i] holds items whose gold set has i foundations; index 0 unused.
  std::array<StratumScore, kNumFoundations + 1> strata{};
  // Unweighted mean over the nonempty strata among i = 1, 2, 3.
  std::optional<double> average;
};

// Unweighted mean of the present values; empty when none is present.
std::optional<double> stratum_average(std::span<const std::optional<double>> accuracies);

// Predictions and golds must cover the same ids exactly once each, in any
// order; otherwise throws Error(kMismatchedIds).
MfcAccuracy mfc_accuracy(std::span<const Prediction> predictions, std::span<const MicRecord> golds,
                         ScoringMode mode = ScoringMode::kExactSet);

double judgment_accuracy(std::span<const Prediction> predictions, std::span<const MicRecord> golds);

struct FoundationRow {
  Foundation foundation = Foundation::kCare;
  double proportion = 0.0;  // share of training records whose gold set includes it
  std::size_t items = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;
  bool empty_stratum = false;
};

// Judgment accuracy per foundation over test items with a single gold
// foundation, ordered by ascending training proportion (canonical order breaks
// ties). Foundations without test items are flagged empty_stratum.
std::vector<FoundationRow> foundation_wise_accuracy(std::span<const Prediction> predictions,
                                                    std::span<const MicRecord> golds,
                                                    const DatasetStats& training_stats);

// exp(-mean(logprob)). Errors: kEmptySequence, kPositiveLogprob.
double perplexity(std::span<const double> token_logprobs);

// Token-weighted perplexity over many scored windows or documents.
class PerplexityAccumulator {
 public:
  void add(std::span<const double> token_logprobs);
  std::size_t tokens() const { return tokens_; }
  double value() const;

 private:
  long double nll_ = 0.0L;
  std::size_t tokens_ = 0;
};

struct ScoreWindow {
  std::size_t begin = 0;        // first context token
  std::size_t end = 0;          // one past the last token
  std::size_t score_begin = 0;  // first token whose logprob counts
};

// Sliding windows over n tokens; each token is scored exactly once, with up to
// window - stride tokens of extra left context when stride < window.
std::vector<ScoreWindow> sliding_windows(std::size_t n_tokens, std::size_t window, std::size_t stride);

struct EvalCell {
  TaskKind task = TaskKind::kMfc;
  Setting setting = Setting::kBase;
  std::size_t size = 0;
  std::string model;

  friend bool operator==(const EvalCell&, const EvalCell&) = default;
};

struct EvalReport {
  EvalCell cell;
  std::uint64_t seed = 1;
  std::size_t items = 0;
  std::size_t unparsable = 0;
  std::optional<MfcAccuracy> mfc;
  std::optional<double> judgment_accuracy;
  std::vector<FoundationRow> foundation_rows;
  std::optional<double> perplexity;
  std::vector<std::uint64_t> seeds;
  std::string aggregation = "single";

  // Average MFC accuracy for mfc, judgment accuracy otherwise.
  std::optional<double> headline() const;

  std::string to_json_text() const;
  static EvalReport from_json_text(std::string_view json_text);
};

// Report with the highest headline accuracy; ties go to the lowest seed.
// Throws Error(kHeterogeneousCell) when the reports describe different cells
// and Error(kInvalidArgument) for an empty list.
EvalReport best_of_seeds(std::span<const EvalReport> reports);

struct InterventionSummary {
  std::string model;
  std::size_t size = 0;
  std::uint64_t seed = 1;
  std::size_t items = 0;
  std::size_t skipped = 0;
  std::size_t changed = 0;
  double original_accuracy = 0.0;
  double intervened_accuracy = 0.0;

  double delta() const { return intervened_accuracy - original_accuracy; }

  std::string to_json_text() const;
  static InterventionSummary from_json_text(std::string_view json_text);
};

// ".433"; half-up rounding to three decimals, "1.000" for one.
std::string format_score(double value);
std::string format_score(const std::optional<double>& value);  // "—" when absent

enum class ReportLayout { kMfcTable, kJudgmentTable, kJointTable, kAll };

struct RenderedReport {
  std::string text;
  // (file name, CSV contents)
  std::vector<std::pair<std::string, std::string>> csv_files;
};

// Fixed-width tables (MFC accuracy by stratum and setting, judgment accuracy
// by setting, judgment vs joint) plus CSV series for the intervention,
// perplexity and per-foundation figures.
RenderedReport render_report(std::span<const EvalReport> reports,
                             std::span<const InterventionSummary> interventions,
                             ReportLayout layout = ReportLayout::kAll);

}  // namespace moralchain
