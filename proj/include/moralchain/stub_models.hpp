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

// Deterministic in-process endpoints for offline runs and tests.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "moralchain/dataset.hpp"
#include "moralchain/prompts.hpp"
#include "moralchain/teacher.hpp"

namespace moralchain {

// FNV-1a, 64 bit.
std::uint64_t stable_hash(std::string_view text) noexcept;
// stable_hash mapped to [0, 1).
double stable_unit(std::string_view text) noexcept;

struct StubTeacherOptions {
  // Share of (prompt, temperature) pairs answered with unmarked prose.
  double failure_rate = 0.0;
};

// Reads the gold foundations and judgment back out of a teacher prompt and
// answers with a well-formed three-step chain that names them.
class StubTeacherBackend : public CompletionBackend {
 public:
  explicit StubTeacherBackend(StubTeacherOptions options = {}) : options_(options) {}
  std::string send(const CompletionRequest& request) override;

 private:
  StubTeacherOptions options_;
};

struct StubModelOptions {
  double base_error = 0.5;
  double base_plus_error = 0.4;
  double ours_error = 0.25;
  // Share of inference answers emitted as unmarked prose.
  double malformed_rate = 0.0;
};

// A fine-tuned model stand-in. It recognizes SFT inputs built from `records`
// and answers in the target layout, wrong with a setting-dependent, hash-drawn
// probability keyed on the endpoint id. On joint/ours the judgment is correct
// exactly when step 2 names the gold set, including for prompts that end at
// "(3)" after a splice.
class StubModelBackend : public CompletionBackend {
 public:
  StubModelBackend(std::vector<MicRecord> records, StubModelOptions options = {});
  std::string send(const CompletionRequest& request) override;

 private:
  struct Entry {
    std::size_t record = 0;
    TaskKind task = TaskKind::kMfc;
    Setting setting = Setting::kBase;
  };
  double error_rate(Setting setting) const;

  std::vector<MicRecord> records_;
  StubModelOptions options_;
  std::map<std::string, Entry, std::less<>> inputs_;
};

// Whitespace tokens; every logprob is negative and depends on the endpoint id,
// the token and the amount of left context inside its window.
class StubScoringBackend : public ScoringBackend {
 public:
  std::vector<double> score(const ScoreRequest& request) override;
};

}  // namespace moralchain
