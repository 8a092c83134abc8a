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

// moralchain command-line tool.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "moralchain/corpus.hpp"
#include "moralchain/error.hpp"
#include "moralchain/pipeline.hpp"

namespace {

using namespace moralchain;

int report_error(std::string_view code, std::string_view message) {
  nlohmann::ordered_json j{{"error", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("moralchain"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Inference-chain corpora and evaluation for moral foundations classification and moral judgment."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path;
  bool stub = false;
  bool verbose = false;
  std::string output_dir;
  std::string cache_dir;
  std::optional<std::size_t> max_in_flight;
  std::optional<std::size_t> request_cap;
  std::string task;
  std::string setting;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  std::string predictions;

  const auto pipeline_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--stub-endpoint", stub, "Use deterministic in-process stub models instead of HTTP endpoints");
    sub->add_flag("-v,--verbose", verbose, "Log progress");
    sub->add_option("--output-dir", output_dir, "Override output_dir");
    sub->add_option("--cache-dir", cache_dir, "Override cache_dir");
    sub->add_option("--max-in-flight", max_in_flight, "Override requests.max_in_flight");
    sub->add_option("--request-cap", request_cap, "Override requests.request_cap");
    sub->add_option("--task", task, "Restrict to one task (mfc, judgment, joint)");
    sub->add_option("--setting", setting, "Restrict to one setting (base, base_plus, ours)");
    sub->add_option("--size", size, "Restrict to one training-set size");
    sub->add_option("--seed", seed, "Restrict to one seed");
  };

  std::vector<std::pair<std::string, CLI::App*>> pipeline_subs;
  const std::pair<const char*, const char*> descriptions[] = {
      {"ingest", "Normalize the dataset and compute statistics"},
      {"gen-chains", "Generate inference chains with the teacher model"},
      {"emit-corpus", "Write fine-tuning corpora and manifests for grid cells"},
      {"eval", "Score predictions or a live model endpoint"},
      {"intervene", "Splice ground-truth foundations into step 2 and regenerate"},
      {"ppl", "Perplexity of the models on a held-out corpus"},
      {"report", "Aggregate seeds and render tables and figure series"},
      {"all", "Run every pipeline step in order"}};
  for (const auto& [name, text] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, text);
    pipeline_options(sub);
    if (std::string_view(name) == "eval") {
      sub->add_option("--predictions", predictions, "JSONL of {id, raw} to score")->check(CLI::ExistingFile);
    }
    pipeline_subs.emplace_back(name, sub);
  }

  std::string synth_dir;
  std::size_t synth_records = 50;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset, held-out text and config");
  synth->add_option("--out", synth_dir, "Target directory")->required();
  synth->add_option("--records", synth_records, "Number of records")->check(CLI::PositiveNumber);

  std::string corpus_path;
  CLI::App* validate = app.add_subcommand("validate", "Check an emitted corpus line by line");
  validate->add_option("--corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  validate->add_option("--task", task, "Task")->required();
  validate->add_option("--setting", setting, "Setting")->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (synth->parsed()) {
      const auto path = write_synthetic_workspace(synth_dir, synth_records);
      std::cout << path.string() << "\n";
      return 0;
    }

    std::optional<TaskKind> task_filter;
    std::optional<Setting> setting_filter;
    if (!task.empty()) {
      task_filter = task_from_name(task);
      if (!task_filter) throw Error(ErrorCode::kInvalidArgument, "unknown task " + task);
    }
    if (!setting.empty()) {
      setting_filter = setting_from_name(setting);
      if (!setting_filter) throw Error(ErrorCode::kInvalidArgument, "unknown setting " + setting);
    }

    if (validate->parsed()) {
      const auto report = validate_corpus(corpus_path, *task_filter, *setting_filter);
      for (const auto& line : report.lines) {
        if (!line.ok()) std::cout << nlohmann::json{{"line", line.line}, {"id", line.id}, {"reasons", line.reasons}}.dump() << "\n";
      }
      if (report.failures() > 0) {
        throw Error(ErrorCode::kCorpusInvalid,
                    std::to_string(report.failures()) + " of " + std::to_string(report.lines.size()) + " lines failed");
      }
      return 0;
    }

    PipelineConfig config = PipelineConfig::load(config_path);
    if (!output_dir.empty()) config.output_dir = std::filesystem::absolute(output_dir);
    if (!cache_dir.empty()) config.cache_dir = std::filesystem::absolute(cache_dir);
    if (max_in_flight) config.client.max_in_flight = *max_in_flight;
    if (request_cap) config.client.request_cap = *request_cap;
    config.validate();

    RunOptions options;
    options.task = task_filter;
    options.setting = setting_filter;
    options.size = size;
    options.seed = seed;
    options.stub = stub;
    if (!predictions.empty()) options.predictions = predictions;
    for (int i = 1; i < argc; ++i) options.args.emplace_back(argv[i]);

    for (const auto& [name, sub] : pipeline_subs) {
      if (!sub->parsed()) continue;
      if (name == "all") {
        for (std::string_view command : kPipelineCommands) run_command(command, config, options);
      } else {
        run_command(name, config, options);
      }
    }
    return 0;
  } catch (const Error& e) {
    return report_error(e.code_name(), e.what());
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what());
  }
}
