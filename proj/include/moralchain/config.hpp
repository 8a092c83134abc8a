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

// Pipeline configuration file.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moralchain/dataset.hpp"
#include "moralchain/evalkit.hpp"
#include "moralchain/prompts.hpp"
#include "moralchain/teacher.hpp"

namespace moralchain {

struct GridSelection {
  std::vector<TaskKind> tasks{kAllTasks[0], kAllTasks[1], kAllTasks[2]};
  std::vector<Setting> settings{kAllSettings[0], kAllSettings[1], kAllSettings[2]};
  std::vector<std::size_t> sizes{5000, 10000, 23500};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct PipelineConfig {
  std::filesystem::path source;  // the config file itself
  std::string digest;            // SHA-256 of its bytes

  std::filesystem::path dataset;
  ColumnSchema schema;
  GridSelection grid;
  EndpointConfig teacher;
  // The model name may contain {task}, {setting}, {size} and {seed}, filled
  // in per grid cell.
  EndpointConfig model_under_test;
  std::string model_label;  // row label in reports; defaults to the endpoint name
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path output_dir;

  DecodingParams teacher_decoding;
  DecodingParams model_decoding;
  int max_regens = 2;
  double temperature_step = 0.3;
  double max_temperature = 1.0;

  ClientOptions client;

  std::string eval_split = "dev";
  ScoringMode scoring_mode = ScoringMode::kExactSet;

  std::optional<std::filesystem::path> perplexity_corpus;
  int perplexity_window = 512;
  int perplexity_stride = 512;

  // Relative paths resolve against the config file's directory. Throws
  // Error(kInvalidConfig) on unknown keys, bad values or missing files.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig parse(std::string_view json_text, const std::filesystem::path& base_dir);

  void validate() const;
};

// The model-under-test endpoint for one grid cell.
EndpointConfig model_endpoint_for(const PipelineConfig& config, TaskKind task, Setting setting, std::size_t size,
                                  std::uint64_t seed);

}  // namespace moralchain
