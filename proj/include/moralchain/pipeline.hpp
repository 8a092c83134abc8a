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

// Subcommand implementations behind the command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moralchain/config.hpp"
#include "moralchain/prompts.hpp"

namespace moralchain {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Pipeline subcommands in their natural order.
inline constexpr std::string_view kPipelineCommands[] = {"ingest", "gen-chains", "emit-corpus", "eval",
                                                         "intervene", "ppl", "report"};

struct RunOptions {
  // Grid filters; unset means every value in the config's grid.
  std::optional<TaskKind> task;
  std::optional<Setting> setting;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  // eval: score this JSONL file instead of querying the model endpoint.
  std::optional<std::filesystem::path> predictions;
  // Use the in-process stub teacher, model and scorer.
  bool stub = false;
  // The command line after the program name, recorded in run manifests.
  std::vector<std::string> args;
};

// Layout under config.output_dir.
struct PipelinePaths {
  std::filesystem::path root;

  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path records() const { return data() / "records.jsonl"; }
  std::filesystem::path chains() const { return root / "chains"; }
  std::filesystem::path corpora() const { return root / "corpora"; }
  std::filesystem::path eval() const { return root / "eval"; }
  std::filesystem::path intervene() const { return root / "intervene"; }
  std::filesystem::path ppl() const { return root / "ppl"; }
  std::filesystem::path report() const { return root / "report"; }
};

void run_ingest(const PipelineConfig& config, const RunOptions& options);
void run_gen_chains(const PipelineConfig& config, const RunOptions& options);
void run_emit_corpus(const PipelineConfig& config, const RunOptions& options);
void run_eval(const PipelineConfig& config, const RunOptions& options);
void run_intervene(const PipelineConfig& config, const RunOptions& options);
void run_ppl(const PipelineConfig& config, const RunOptions& options);
void run_report(const PipelineConfig& config, const RunOptions& options);

// Dispatches on a name from kPipelineCommands. Throws Error(kInvalidArgument)
// for anything else.
void run_command(std::string_view command, const PipelineConfig& config, const RunOptions& options);

// Writes a synthetic dataset, its schema, a held-out text corpus and a
// ready-to-run config into `dir`. Returns the config path.
std::filesystem::path write_synthetic_workspace(const std::filesystem::path& dir, std::size_t records);

}  // namespace moralchain
