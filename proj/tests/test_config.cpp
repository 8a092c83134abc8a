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

#include <doctest.h>

#include "moralchain/config.hpp"
#include "moralchain/error.hpp"
#include "moralchain/io.hpp"
#include "moralchain/pipeline.hpp"
#include "support.hpp"

using namespace moralchain;

namespace {

ErrorCode parse_error(const std::string& json, const std::filesystem::path& base) {
  try {
    PipelineConfig::parse(json, base);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("minimal config with defaults") {
  testing_support::TempDir dir("config");
  write_file(dir.path() / "mic.csv", "id\n");
  const auto c = PipelineConfig::parse(R"({"dataset":{"path":"mic.csv"}})", dir.path());
  CHECK(c.dataset == dir.path() / "mic.csv");
  CHECK(c.output_dir == dir.path() / "out");
  CHECK(c.grid.sizes == std::vector<std::size_t>{5000, 10000, 23500});
  CHECK(c.grid.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.grid.tasks.size() == 3);
  CHECK(c.grid.settings.size() == 3);
  CHECK(c.eval_split == "dev");
  CHECK(c.scoring_mode == ScoringMode::kExactSet);
  CHECK_FALSE(c.cache_dir.has_value());
  CHECK(c.model_label == "model");
  CHECK(c.digest.size() == 64);
}

TEST_CASE("full config") {
  testing_support::TempDir dir("config");
  write_file(dir.path() / "mic.tsv", "id\n");
  write_file(dir.path() / "wiki.txt", "text\n");
  const auto c = PipelineConfig::parse(R"({
    "dataset": {"path": "mic.tsv", "schema": {"prompt": "Q", "agreement": null}},
    "grid": {"tasks": ["joint"], "settings": ["base+", "ours"], "sizes": [10], "seeds": [7]},
    "teacher": {"base_url": "https://api.example.com", "model": "chat", "api_key_env": "KEY",
                "decoding": {"max_tokens": 300, "temperature": 0.2}},
    "model_under_test": {"name": "local", "label": "llama3.2-1B", "base_url": "http://127.0.0.1:8000",
                         "model": "ft-{task}-{setting}-{size}-s{seed}"},
    "cache_dir": "cache",
    "generation": {"max_regens": 4},
    "requests": {"max_in_flight": 2, "request_cap": 100, "initial_backoff_ms": 5},
    "evaluation": {"split": "test", "scoring_mode": "per_label"},
    "perplexity": {"corpus": "wiki.txt", "window": 128, "stride": 64}
  })", dir.path());
  CHECK(c.schema.prompt == "Q");
  CHECK_FALSE(c.schema.agreement.has_value());
  CHECK(c.grid.tasks == std::vector<TaskKind>{TaskKind::kJoint});
  CHECK(c.grid.settings == std::vector<Setting>{Setting::kBasePlus, Setting::kOurs});
  CHECK(c.teacher.name == "teacher");
  CHECK(c.teacher_decoding.max_tokens == 300);
  CHECK(c.model_label == "llama3.2-1B");
  CHECK(c.cache_dir == dir.path() / "cache");
  CHECK(c.max_regens == 4);
  CHECK(c.client.request_cap == std::optional<std::size_t>(100));
  CHECK(c.client.retry.initial_backoff.count() == 5);
  CHECK(c.scoring_mode == ScoringMode::kPerLabel);
  CHECK(c.perplexity_corpus == dir.path() / "wiki.txt");
  const auto e = model_endpoint_for(c, TaskKind::kJoint, Setting::kOurs, 10, 7);
  CHECK(e.model == "ft-joint-ours-10-s7");
  CHECK(e.name == "local");
}

TEST_CASE("invalid configs") {
  testing_support::TempDir dir("config");
  write_file(dir.path() / "mic.csv", "id\n");
  const auto base = dir.path();
  CHECK(parse_error("not json", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"missing.csv"}})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"extra":1})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"grid":{"tasks":["mfi"]}})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"grid":{"sizes":[0]}})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"grid":{"seeds":[]}})", base) == ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"evaluation":{"scoring_mode":"fuzzy"}})", base) ==
        ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"perplexity":{"window":8,"stride":16}})", base) ==
        ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"teacher":{"decoding":{"top_p":1}}})", base) ==
        ErrorCode::kInvalidConfig);
  CHECK(parse_error(R"({"dataset":{"path":"mic.csv"},"requests":{"max_in_flight":"many"}})", base) ==
        ErrorCode::kInvalidConfig);
  try {
    PipelineConfig::load(dir.path() / "none.json");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("synthetic workspace config loads") {
  testing_support::TempDir dir("workspace");
  const auto path = write_synthetic_workspace(dir.path(), 50);
  const auto c = PipelineConfig::load(path);
  CHECK(c.source == path);
  CHECK(c.digest == sha256_file(path));
  CHECK(std::filesystem::exists(c.dataset));
  CHECK(c.perplexity_corpus.has_value());
  CHECK(c.grid.sizes == std::vector<std::size_t>{20, 5000});
  CHECK(c.grid.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(model_endpoint_for(c, TaskKind::kMfc, Setting::kBasePlus, 20, 2).model == "stub-1B-mfc-base_plus-20-s2");
}
