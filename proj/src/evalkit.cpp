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

#include "moralchain/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "moralchain/chain.hpp"
#include "moralchain/error.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

// Text up to the first period or newline.
std::string_view first_sentence(std::string_view s) {
  const std::size_t end = s.find_first_of(".\n");
  return end == std::string_view::npos ? s : s.substr(0, end);
}

std::optional<FoundationSet> try_parse_foundations(std::string_view s) {
  try {
    return parse_foundations(s);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<Judgment> first_judgment_word(std::string_view s) {
  const std::string lowered = text::to_lower(s);
  for (std::size_t pos = 0; pos < lowered.size();) {
    if (!text::is_word_char(lowered[pos])) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < lowered.size() && text::is_word_char(lowered[end])) ++end;
    const std::string_view word(lowered.data() + pos, end - pos);
    for (Judgment j : kAllJudgments) {
      if (word == judgment_name(j)) return j;
    }
    pos = end;
  }
  return std::nullopt;
}

std::optional<FoundationSet> foundations_after_anchor(std::string_view scope, std::string_view anchor) {
  const std::size_t at = text::irfind(scope, anchor);
  if (at == std::string::npos) return std::nullopt;
  return try_parse_foundations(first_sentence(scope.substr(at + anchor.size())));
}

bool has_anchor(std::string_view scope, std::string_view anchor) {
  return text::irfind(scope, anchor) != std::string::npos;
}

struct Aligned {
  const Prediction* prediction;
  const MicRecord* gold;
};

std::vector<Aligned> align(std::span<const Prediction> predictions, std::span<const MicRecord> golds) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCode::kMismatchedIds, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(golds.size()) + " gold records");
  }
  std::map<std::string_view, const MicRecord*> by_id;
  for (const auto& g : golds) {
    if (!by_id.emplace(g.id, &g).second) {
      throw Error(ErrorCode::kMismatchedIds, "duplicate gold id " + g.id);
    }
  }
  std::vector<Aligned> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMismatchedIds, "prediction id " + p.id + " has no gold record");
    }
    if (it->second == nullptr) throw Error(ErrorCode::kMismatchedIds, "duplicate prediction id " + p.id);
    out.push_back({&p, it->second});
    it->second = nullptr;
  }
  return out;
}

double set_credit(const std::optional<FoundationSet>& predicted, const FoundationSet& gold, ScoringMode mode) {
  if (!predicted) return 0.0;
  if (mode == ScoringMode::kExactSet) return *predicted == gold ? 1.0 : 0.0;
  const std::size_t uni = predicted->unite(gold).size();
  return uni == 0 ? 0.0 : static_cast<double>(predicted->intersect(gold).size()) / static_cast<double>(uni);
}

}  // namespace

Prediction parse_prediction(std::string id, std::string_view raw, TaskKind task) {
  Prediction p;
  p.id = std::move(id);
  p.raw = std::string(raw);
  std::string_view scope = raw;
  if (const std::size_t at = scope.rfind(kInferenceMarker); at != std::string_view::npos) {
    scope = scope.substr(at + kInferenceMarker.size());
  }

  if (task == TaskKind::kMfc || task == TaskKind::kJoint) {
    if (has_anchor(scope, kMfcAnchor)) {
      p.foundations = foundations_after_anchor(scope, kMfcAnchor);
    } else if (task == TaskKind::kJoint && has_anchor(scope, "underlying this")) {
      p.foundations = foundations_after_anchor(scope, "underlying this");
    } else {
      if (task == TaskKind::kJoint) {
        try {
          p.foundations = try_parse_foundations(segment_chain(scope).step2);
        } catch (const Error&) {
        }
      }
      if (!p.foundations) {
        std::string_view rest = scope;
        if (task == TaskKind::kJoint) {
          // The judgment sentence never names foundations; keep the scan off it.
          if (const std::size_t at = text::irfind(rest, kJudgmentAnchor); at != std::string::npos) {
            rest = rest.substr(0, at);
          }
        }
        p.foundations = try_parse_foundations(rest);
      }
    }
  }

  if (task == TaskKind::kJudgment || task == TaskKind::kJoint) {
    if (const std::size_t at = text::irfind(scope, kJudgmentAnchor); at != std::string::npos) {
      p.judgment = first_judgment_word(scope.substr(at + kJudgmentAnchor.size()));
    } else {
      p.judgment = first_judgment_word(scope);
    }
  }
  return p;
}

std::vector<std::pair<std::string, std::string>> read_predictions_jsonl(std::string_view content) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = text::trim(content.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.emplace_back(j.at("id").get<std::string>(), j.at("raw").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRow, "predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string predictions_to_jsonl(std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j{{"id", p.id}, {"raw", p.raw}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::optional<double> stratum_average(std::span<const std::optional<double>> accuracies) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& a : accuracies) {
    if (!a) continue;
    sum += *a;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

MfcAccuracy mfc_accuracy(std::span<const Prediction> predictions, std::span<const MicRecord> golds,
                         ScoringMode mode) {
  MfcAccuracy acc;
  for (const auto& [pred, gold] : align(predictions, golds)) {
    const std::size_t k = gold->gold_foundations.size();
    if (k == 0 || k > kNumFoundations) continue;
    acc.strata[k].items += 1;
    acc.strata[k].credit += set_credit(pred->foundations, gold->gold_foundations, mode);
  }
  std::array<std::optional<double>, kReportedStrata> reported;
  for (std::size_t i = 0; i < kReportedStrata; ++i) reported[i] = acc.strata[i + 1].accuracy();
  acc.average = stratum_average(reported);
  return acc;
}

double judgment_accuracy(std::span<const Prediction> predictions, std::span<const MicRecord> golds) {
  const auto aligned = align(predictions, golds);
  if (aligned.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& [pred, gold] : aligned) {
    if (pred->judgment && *pred->judgment == gold->gold_judgment) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(aligned.size());
}

std::vector<FoundationRow> foundation_wise_accuracy(std::span<const Prediction> predictions,
                                                    std::span<const MicRecord> golds,
                                                    const DatasetStats& training_stats) {
  std::vector<FoundationRow> rows;
  for (Foundation f : canonical_foundations()) {
    FoundationRow row;
    row.foundation = f;
    row.proportion = training_stats.inclusion_proportion(f);
    rows.push_back(row);
  }
  for (const auto& [pred, gold] : align(predictions, golds)) {
    if (gold->gold_foundations.size() != 1) continue;
    FoundationRow& row = rows[static_cast<std::size_t>(*gold->gold_foundations.begin())];
    ++row.items;
    if (pred->judgment && *pred->judgment == gold->gold_judgment) ++row.correct;
  }
  for (auto& row : rows) {
    row.empty_stratum = row.items == 0;
    if (!row.empty_stratum) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.items);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FoundationRow& a, const FoundationRow& b) { return a.proportion < b.proportion; });
  return rows;
}

double perplexity(std::span<const double> token_logprobs) {
  PerplexityAccumulator acc;
  acc.add(token_logprobs);
  return acc.value();
}

void PerplexityAccumulator::add(std::span<const double> token_logprobs) {
  for (double lp : token_logprobs) {
    if (!(lp <= 0.0)) {
      throw Error(ErrorCode::kPositiveLogprob, "token logprob " + std::to_string(lp) + " is not <= 0");
    }
  }
  for (double lp : token_logprobs) nll_ -= static_cast<long double>(lp);
  tokens_ += token_logprobs.size();
}

double PerplexityAccumulator::value() const {
  if (tokens_ == 0) throw Error(ErrorCode::kEmptySequence, "no token logprobs to score");
  return static_cast<double>(std::exp(nll_ / static_cast<long double>(tokens_)));
}

std::vector<ScoreWindow> sliding_windows(std::size_t n_tokens, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0 || stride > window) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < stride <= window");
  }
  std::vector<ScoreWindow> out;
  std::size_t scored_to = 0;
  for (std::size_t begin = 0; scored_to < n_tokens; begin += stride) {
    const std::size_t end = std::min(begin + window, n_tokens);
    out.push_back({begin, end, scored_to});
    scored_to = end;
  }
  return out;
}

}  // namespace moralchain
