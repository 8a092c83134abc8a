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

#include "moralchain/pipeline.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <spdlog/spdlog.h>

#include "moralchain/corpus.hpp"
#include "moralchain/error.hpp"
#include "moralchain/evalkit.hpp"
#include "moralchain/intervene.hpp"
#include "moralchain/io.hpp"
#include "moralchain/stub_models.hpp"
#include "moralchain/synthetic.hpp"
#include "moralchain/teacher.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Collects the files a command writes and records them in run_manifest.json.
class RunLog {
 public:
  RunLog(std::string_view command, const PipelineConfig& config, const RunOptions& options, fs::path dir)
      : command_(command), config_(config), options_(options), dir_(std::move(dir)) {}

  void input(const fs::path& path) { inputs_[display(path)] = sha256_file(path); }

  void write(const fs::path& path, std::string_view content) {
    write_file(path, content);
    outputs_[display(path)] = sha256_hex(content);
  }

  void written(const fs::path& path) { outputs_[display(path)] = sha256_file(path); }

  void finish() {
    ojson j{{"tool", "moralchain"},
            {"version", kToolVersion},
            {"command", command_},
            {"args", options_.args},
            {"config", {{"path", config_.source.string()}, {"sha256", config_.digest}}},
            {"stub_endpoints", options_.stub}};
    auto list = [](const std::map<std::string, std::string>& m) {
      ojson a = ojson::array();
      for (const auto& [p, h] : m) a.push_back({{"path", p}, {"sha256", h}});
      return a;
    };
    j["inputs"] = list(inputs_);
    j["outputs"] = list(outputs_);
    write_file(dir_ / "run_manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string display(const fs::path& path) const {
    const fs::path rel = path.lexically_relative(config_.output_dir);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return path.generic_string();
  }

  std::string command_;
  const PipelineConfig& config_;
  const RunOptions& options_;
  fs::path dir_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

struct Cell {
  TaskKind task;
  Setting setting;
  std::size_t size;
  std::uint64_t seed;

  CorpusCell corpus_cell() const { return {task, setting, size, seed}; }
  std::string slug() const { return corpus_cell().slug(); }
};

template <typename T>
std::vector<T> pick(const std::vector<T>& all, const std::optional<T>& only) {
  if (!only) return all;
  if (std::find(all.begin(), all.end(), *only) == all.end()) {
    throw Error(ErrorCode::kInvalidArgument, "requested value is not part of the configured grid");
  }
  return {*only};
}

std::vector<Cell> grid_cells(const PipelineConfig& config, const RunOptions& options) {
  std::vector<Cell> cells;
  for (TaskKind t : pick(config.grid.tasks, options.task)) {
    for (Setting s : pick(config.grid.settings, options.setting)) {
      for (std::size_t n : pick(config.grid.sizes, options.size)) {
        for (std::uint64_t seed : pick(config.grid.seeds, options.seed)) cells.push_back({t, s, n, seed});
      }
    }
  }
  return cells;
}

std::vector<MicRecord> load_records(const PipelineConfig& config, RunLog& log) {
  const fs::path path = PipelinePaths{config.output_dir}.records();
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kUnreadableFile, "no normalized records at " + path.string() + "; run ingest first");
  }
  log.input(path);
  return records_from_jsonl(read_file(path));
}

std::vector<MicRecord> training_pool(std::span<const MicRecord> records) {
  return filter_split(filter_full_agreement(records), "train");
}

std::vector<MicRecord> test_set(const PipelineConfig& config, std::span<const MicRecord> records) {
  auto test = filter_split(filter_full_agreement(records), config.eval_split);
  if (test.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "no full-agreement records in split \"" + config.eval_split + "\"");
  }
  return test;
}

std::string endpoint_id_for(const EndpointConfig& e, bool stub) {
  return stub ? "stub:" + e.name + ":" + e.model : e.endpoint_id();
}

void require_remote(const EndpointConfig& e, const RunOptions& options) {
  if (!options.stub && e.base_url.empty()) {
    throw Error(ErrorCode::kInvalidConfig, e.name + ".base_url is required unless --stub-endpoint is given");
  }
}

// Routes each request to the HTTP backend for its endpoint id.
class RoutingBackend : public CompletionBackend {
 public:
  void add(const EndpointConfig& e) {
    std::lock_guard lock(mu_);
    if (!routes_.count(e.endpoint_id())) routes_.emplace(e.endpoint_id(), make_http_completion_backend(e));
  }

  std::string send(const CompletionRequest& request) override {
    std::shared_ptr<CompletionBackend> backend;
    {
      std::lock_guard lock(mu_);
      auto it = routes_.find(request.endpoint_id);
      if (it == routes_.end()) throw Error(ErrorCode::kInvalidArgument, "no route for " + request.endpoint_id);
      backend = it->second;
    }
    return backend->send(request);
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<CompletionBackend>> routes_;
};

std::shared_ptr<ResponseCache> make_cache(const PipelineConfig& config) {
  return std::make_shared<ResponseCache>(config.cache_dir);
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- chains on disk ----

struct ChainStore {
  ChainMap chains;
  std::map<std::string, std::pair<std::string, std::string>> failures;  // id -> (code, message)
};

fs::path chain_file(const PipelineConfig& config, TaskKind task) {
  return PipelinePaths{config.output_dir}.chains() / (std::string(task_name(task)) + ".jsonl");
}

fs::path failure_file(const PipelineConfig& config, TaskKind task) {
  return PipelinePaths{config.output_dir}.chains() / (std::string(task_name(task)) + ".failures.jsonl");
}

ChainStore load_chain_store(const PipelineConfig& config, TaskKind task) {
  ChainStore store;
  const auto read_lines = [](const fs::path& p, const auto& fn) {
    if (!fs::is_regular_file(p)) return;
    const std::string content = read_file(p);
    std::size_t pos = 0;
    while (pos < content.size()) {
      auto nl = content.find('\n', pos);
      if (nl == std::string::npos) nl = content.size();
      const std::string_view line(content.data() + pos, nl - pos);
      pos = nl + 1;
      if (text::trim(line).empty()) continue;
      try {
        fn(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kMalformedRow, p.string() + ": " + e.what());
      }
    }
  };
  read_lines(chain_file(config, task), [&](const nlohmann::json& j) {
    InferenceChain c = make_chain(j.at("step1"), j.at("step2"), j.at("step3"));
    c.raw = j.at("raw").get<std::string>();
    store.chains[j.at("id").get<std::string>()] = std::move(c);
  });
  read_lines(failure_file(config, task), [&](const nlohmann::json& j) {
    store.failures[j.at("id").get<std::string>()] = {j.at("error").get<std::string>(),
                                                     j.at("message").get<std::string>()};
  });
  return store;
}

void save_chain_store(const PipelineConfig& config, TaskKind task, const ChainStore& store,
                      const std::map<std::string, const MicRecord*>& by_id, RunLog& log) {
  std::string chains;
  for (const auto& [id, c] : store.chains) {
    ojson j{{"id", id}};
    if (auto it = by_id.find(id); it != by_id.end()) j["teacher_prompt"] = build_teacher_prompt(*it->second, task);
    j["step1"] = c.step1;
    j["step2"] = c.step2;
    j["step3"] = c.step3;
    j["raw"] = c.raw;
    chains += j.dump() + "\n";
  }
  std::string failures;
  for (const auto& [id, f] : store.failures) {
    failures += ojson{{"id", id}, {"error", f.first}, {"message", f.second}}.dump() + "\n";
  }
  log.write(chain_file(config, task), chains);
  log.write(failure_file(config, task), failures);
}

// ---- predictions ----

std::vector<Prediction> predict(CompletionClient& client, const std::string& endpoint_id,
                                const DecodingParams& decoding, std::span<const MicRecord> test, TaskKind task,
                                Setting setting) {
  std::vector<Prediction> out(test.size());
  const auto errors = parallel_for(test.size(), client.options().max_in_flight, [&](std::size_t i) {
    CompletionRequest request{endpoint_id, build_sft_input(test[i], task, setting), decoding};
    out[i] = parse_prediction(test[i].id, client.complete(request), task);
  });
  rethrow_first(errors);
  return out;
}

DatasetStats training_stats(const PipelineConfig& config, const Cell& cell, std::span<const MicRecord> pool,
                            RunLog& log) {
  const fs::path manifest =
      manifest_path_for(PipelinePaths{config.output_dir}.corpora() / (cell.slug() + ".jsonl"));
  if (fs::is_regular_file(manifest)) {
    log.input(manifest);
    return CorpusManifest::from_json_text(read_file(manifest)).stats;
  }
  return compute_stats(sample_subset(pool, cell.size, cell.seed));
}

std::vector<std::string> split_documents(std::string_view text) {
  std::vector<std::string> docs;
  std::string current;
  std::size_t pos = 0;
  auto flush = [&] {
    const auto t = text::trim(current);
    if (!t.empty()) docs.emplace_back(t);
    current.clear();
  };
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) {
      flush();
    } else {
      current.append(line);
      current.push_back('\n');
    }
    pos = nl + 1;
  }
  flush();
  return docs;
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, std::string_view suffix) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && text::ends_with(name, suffix)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void run_ingest(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("ingest", config, options, paths.data());
  log.input(config.dataset);
  const IngestResult result = ingest(config.dataset, config.schema);
  log.write(paths.records(), records_to_jsonl(result.records));
  log.write(paths.data() / "rejects.jsonl", rejects_to_jsonl(result.rejects));
  const auto pool = training_pool(result.records);
  log.write(paths.data() / "stats.json", compute_stats(pool).to_json_text());

  std::map<std::string, std::size_t> splits;
  for (const auto& r : result.records) ++splits[r.split];
  ojson summary{{"rows", result.records.size() + result.rejects.size()},
                {"records", result.records.size()},
                {"rejected", result.rejects.size()},
                {"agreement_defaulted", result.agreement_defaulted},
                {"full_agreement", filter_full_agreement(result.records).size()},
                {"training_pool", pool.size()},
                {"splits", splits}};
  log.write(paths.data() / "summary.json", summary.dump(2) + "\n");
  log.finish();
  spdlog::info("ingest: {} records, {} rejected, training pool {}", result.records.size(), result.rejects.size(),
               pool.size());
}

void run_gen_chains(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("gen-chains", config, options, paths.chains());
  const auto records = load_records(config, log);
  const auto pool = training_pool(records);
  std::map<std::string, const MicRecord*> by_id;
  for (const auto& r : pool) by_id.emplace(r.id, &r);

  const auto settings = pick(config.grid.settings, options.setting);
  if (std::find(settings.begin(), settings.end(), Setting::kOurs) == settings.end()) {
    spdlog::info("gen-chains: the selected grid has no ours setting; nothing to generate");
    log.finish();
    return;
  }
  require_remote(config.teacher, options);
  std::shared_ptr<CompletionBackend> backend;
  if (options.stub) {
    backend = std::make_shared<StubTeacherBackend>();
  } else {
    backend = make_http_completion_backend(config.teacher);
  }
  CompletionClient client(backend, make_cache(config), config.client);
  GenerationOptions gen;
  gen.endpoint_id = endpoint_id_for(config.teacher, options.stub);
  gen.decoding = config.teacher_decoding;
  gen.max_regens = config.max_regens;
  gen.temperature_step = config.temperature_step;
  gen.max_temperature = config.max_temperature;

  const auto sizes = pick(config.grid.sizes, options.size);
  const auto seeds = pick(config.grid.seeds, options.seed);
  std::vector<std::vector<MicRecord>> queues;
  for (std::size_t n : sizes) {
    for (std::uint64_t seed : seeds) queues.push_back(sampling_queue(pool, n, seed));
  }

  for (TaskKind task : pick(config.grid.tasks, options.task)) {
    ChainStore store = load_chain_store(config, task);
    std::exception_ptr fatal;
    while (!fatal) {
      // Ids each cell still needs, assuming pending generations succeed.
      std::set<std::string> pending;
      std::size_t q = 0;
      for (std::size_t n : sizes) {
        for (std::size_t s = 0; s < seeds.size(); ++s, ++q) {
          std::size_t have = 0;
          for (const auto& r : queues[q]) {
            if (have == n) break;
            if (store.failures.count(r.id)) continue;
            if (!store.chains.count(r.id)) pending.insert(r.id);
            ++have;
          }
        }
      }
      if (pending.empty()) break;
      const std::vector<std::string> ids(pending.begin(), pending.end());
      std::vector<std::optional<InferenceChain>> made(ids.size());
      const auto errors = parallel_for(ids.size(), config.client.max_in_flight, [&](std::size_t i) {
        made[i] = generate_chain(client, *by_id.at(ids[i]), task, gen);
      });
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!errors[i]) {
          store.chains[ids[i]] = std::move(*made[i]);
          continue;
        }
        try {
          std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kChainGenerationFailed) {
            if (!fatal) fatal = errors[i];
            continue;
          }
          store.failures[ids[i]] = {std::string(e.code_name()), e.what()};
          spdlog::warn("gen-chains: {}", e.what());
        } catch (...) {
          if (!fatal) fatal = errors[i];
        }
      }
      save_chain_store(config, task, store, by_id, log);
    }
    save_chain_store(config, task, store, by_id, log);
    spdlog::info("gen-chains {}: {} chains, {} failures, {} network calls, {} cache hits", task_name(task),
                 store.chains.size(), store.failures.size(), client.network_calls(), client.cache_hits());
    if (fatal) {
      log.finish();
      std::rethrow_exception(fatal);
    }
  }
  log.finish();
}

void run_emit_corpus(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("emit-corpus", config, options, paths.corpora());
  const auto records = load_records(config, log);
  const auto pool = training_pool(records);
  std::map<TaskKind, ChainMap> chains;
  std::size_t invalid = 0;
  for (const Cell& cell : grid_cells(config, options)) {
    const ChainMap* cell_chains = nullptr;
    static const ChainMap kNoChains;
    if (cell.setting == Setting::kOurs) {
      if (!chains.count(cell.task)) {
        const fs::path file = chain_file(config, cell.task);
        if (!fs::is_regular_file(file)) {
          throw Error(ErrorCode::kMissingChain, "no chains for task " + std::string(task_name(cell.task)) +
                                                    "; run gen-chains first");
        }
        log.input(file);
        chains[cell.task] = load_chain_store(config, cell.task).chains;
      }
      cell_chains = &chains[cell.task];
    } else {
      cell_chains = &kNoChains;
    }
    const auto queue = sampling_queue(pool, cell.size, cell.seed);
    const auto selection = select_for_corpus(queue, cell.size, cell.setting, *cell_chains);
    if (selection.records.size() < std::min(cell.size, pool.size())) {
      spdlog::warn("emit-corpus {}: only {} of {} records have chains", cell.slug(), selection.records.size(),
                   cell.size);
    }
    const fs::path out = paths.corpora() / (cell.slug() + ".jsonl");
    emit_corpus(selection.records, cell.corpus_cell(), *cell_chains, out, selection.skipped_ids.size());
    log.written(out);
    log.written(manifest_path_for(out));
    const auto report = validate_corpus(out, cell.task, cell.setting);
    log.write(paths.corpora() / (cell.slug() + ".validation.jsonl"), report.to_jsonl());
    if (report.failures() > 0) {
      spdlog::error("emit-corpus {}: {} invalid lines", cell.slug(), report.failures());
      invalid += report.failures();
    }
  }
  log.finish();
  if (invalid > 0) {
    throw Error(ErrorCode::kCorpusInvalid, std::to_string(invalid) + " corpus lines failed validation");
  }
}

void run_eval(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("eval", config, options, paths.eval());
  const auto records = load_records(config, log);
  const auto pool = training_pool(records);
  const auto test = test_set(config, records);
  const auto cells = grid_cells(config, options);
  if (options.predictions && cells.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "--predictions scores one grid cell; select it with --task, --setting, --size and --seed");
  }

  std::shared_ptr<CompletionClient> client;
  std::shared_ptr<RoutingBackend> router;
  if (!options.predictions) {
    require_remote(config.model_under_test, options);
    std::shared_ptr<CompletionBackend> backend;
    if (options.stub) {
      backend = std::make_shared<StubModelBackend>(records);
    } else {
      router = std::make_shared<RoutingBackend>();
      backend = router;
    }
    client = std::make_shared<CompletionClient>(backend, make_cache(config), config.client);
  }

  for (const Cell& cell : cells) {
    std::vector<Prediction> preds;
    if (options.predictions) {
      log.input(*options.predictions);
      for (auto& [id, raw] : read_predictions_jsonl(read_file(*options.predictions))) {
        preds.push_back(parse_prediction(id, raw, cell.task));
      }
    } else {
      const EndpointConfig e = model_endpoint_for(config, cell.task, cell.setting, cell.size, cell.seed);
      if (router) router->add(e);
      preds = predict(*client, endpoint_id_for(e, options.stub), config.model_decoding, test, cell.task,
                      cell.setting);
    }

    EvalReport report;
    report.cell = {cell.task, cell.setting, cell.size, config.model_label};
    report.seed = cell.seed;
    report.seeds = {cell.seed};
    report.items = preds.size();
    for (const auto& p : preds) report.unparsable += p.scorable() ? 0 : 1;
    if (cell.task != TaskKind::kJudgment) report.mfc = mfc_accuracy(preds, test, config.scoring_mode);
    if (cell.task != TaskKind::kMfc) {
      report.judgment_accuracy = judgment_accuracy(preds, test);
      report.foundation_rows = foundation_wise_accuracy(preds, test, training_stats(config, cell, pool, log));
    }
    log.write(paths.eval() / (cell.slug() + ".predictions.jsonl"), predictions_to_jsonl(preds));
    log.write(paths.eval() / (cell.slug() + ".report.json"), report.to_json_text());
    spdlog::info("eval {}: headline {}", cell.slug(), format_score(report.headline()));
  }
  log.finish();
}

void run_intervene(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("intervene", config, options, paths.intervene());
  const auto grid_has = [](const auto& v, auto x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  if (!grid_has(config.grid.tasks, TaskKind::kJoint) || !grid_has(config.grid.settings, Setting::kOurs) ||
      (options.task && *options.task != TaskKind::kJoint) || (options.setting && *options.setting != Setting::kOurs)) {
    throw Error(ErrorCode::kInvalidArgument, "intervene runs on the joint task in the ours setting");
  }
  const auto records = load_records(config, log);
  const auto test = test_set(config, records);
  require_remote(config.model_under_test, options);

  std::shared_ptr<CompletionBackend> backend;
  std::shared_ptr<RoutingBackend> router;
  if (options.stub) {
    backend = std::make_shared<StubModelBackend>(records);
  } else {
    router = std::make_shared<RoutingBackend>();
    backend = router;
  }
  CompletionClient client(backend, make_cache(config), config.client);

  for (std::size_t n : pick(config.grid.sizes, options.size)) {
    for (std::uint64_t seed : pick(config.grid.seeds, options.seed)) {
      const Cell cell{TaskKind::kJoint, Setting::kOurs, n, seed};
      const EndpointConfig e = model_endpoint_for(config, cell.task, cell.setting, n, seed);
      if (router) router->add(e);
      InterventionOptions io{endpoint_id_for(e, options.stub), config.model_decoding};
      const auto run = run_interventions(client, test, io, config.client.max_in_flight);
      InterventionSummary summary = summarize_interventions(run, test);
      summary.model = config.model_label;
      summary.size = n;
      summary.seed = seed;
      log.write(paths.intervene() / (cell.slug() + ".outcomes.jsonl"), outcomes_to_jsonl(run.outcomes));
      log.write(paths.intervene() / (cell.slug() + ".skipped.jsonl"), skipped_to_jsonl(run.skipped));
      log.write(paths.intervene() / (cell.slug() + ".summary.json"), summary.to_json_text());
      spdlog::info("intervene {}: {} items, {} skipped, delta {}", cell.slug(), summary.items, summary.skipped,
                   summary.delta());
    }
  }
  log.finish();
}

void run_ppl(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("ppl", config, options, paths.ppl());
  if (!config.perplexity_corpus) throw Error(ErrorCode::kInvalidConfig, "perplexity.corpus is not set");
  log.input(*config.perplexity_corpus);
  const auto docs = split_documents(read_file(*config.perplexity_corpus));
  if (docs.empty()) throw Error(ErrorCode::kEmptySequence, "perplexity corpus has no text");
  require_remote(config.model_under_test, options);

  std::shared_ptr<ScoringBackend> stub;
  if (options.stub) stub = std::make_shared<StubScoringBackend>();
  for (const Cell& cell : grid_cells(config, options)) {
    const EndpointConfig e = model_endpoint_for(config, cell.task, cell.setting, cell.size, cell.seed);
    const auto scorer = options.stub ? stub : make_http_scoring_backend(e, config.client.retry);
    std::vector<std::vector<double>> scored(docs.size());
    const auto errors = parallel_for(docs.size(), config.client.max_in_flight, [&](std::size_t i) {
      scored[i] = scorer->score({endpoint_id_for(e, options.stub), docs[i], config.perplexity_window,
                                 config.perplexity_stride});
    });
    rethrow_first(errors);
    PerplexityAccumulator acc;
    for (const auto& lp : scored) acc.add(lp);
    ojson j{{"task", task_name(cell.task)},
            {"setting", setting_name(cell.setting)},
            {"size", cell.size},
            {"seed", cell.seed},
            {"model", config.model_label},
            {"endpoint", endpoint_id_for(e, options.stub)},
            {"window", config.perplexity_window},
            {"stride", config.perplexity_stride},
            {"documents", docs.size()},
            {"tokens", acc.tokens()},
            {"perplexity", acc.value()}};
    log.write(paths.ppl() / (cell.slug() + ".json"), j.dump(2) + "\n");
  }
  log.finish();
}

void run_report(const PipelineConfig& config, const RunOptions& options) {
  const PipelinePaths paths{config.output_dir};
  RunLog log("report", config, options, paths.report());

  std::map<std::string, double> ppl;  // cell slug -> perplexity
  for (const auto& p : files_with_suffix(paths.ppl(), ".json")) {
    if (p.filename() == "run_manifest.json") continue;
    log.input(p);
    const auto j = nlohmann::json::parse(read_file(p));
    const auto task = task_from_name(j.at("task").get<std::string>());
    const auto setting = setting_from_name(j.at("setting").get<std::string>());
    if (!task || !setting) throw Error(ErrorCode::kInvalidArgument, "bad perplexity file " + p.string());
    ppl[Cell{*task, *setting, j.at("size").get<std::size_t>(), j.at("seed").get<std::uint64_t>()}.slug()] =
        j.at("perplexity").get<double>();
  }

  std::map<std::tuple<int, int, std::size_t, std::string>, std::vector<EvalReport>> groups;
  for (const auto& p : files_with_suffix(paths.eval(), ".report.json")) {
    log.input(p);
    EvalReport r = EvalReport::from_json_text(read_file(p));
    const Cell cell{r.cell.task, r.cell.setting, r.cell.size, r.seed};
    if (auto it = ppl.find(cell.slug()); it != ppl.end()) r.perplexity = it->second;
    groups[{static_cast<int>(r.cell.task), static_cast<int>(r.cell.setting), r.cell.size, r.cell.model}].push_back(
        std::move(r));
  }
  std::vector<EvalReport> best;
  std::vector<EvalReport> all;
  for (auto& [key, reports] : groups) {
    best.push_back(best_of_seeds(reports));
    all.insert(all.end(), reports.begin(), reports.end());
  }

  std::vector<InterventionSummary> interventions;
  for (const auto& p : files_with_suffix(paths.intervene(), ".summary.json")) {
    log.input(p);
    interventions.push_back(InterventionSummary::from_json_text(read_file(p)));
  }

  const RenderedReport rendered = render_report(best, interventions, ReportLayout::kAll);
  log.write(paths.report() / "report.txt", rendered.text);
  for (const auto& [name, csv] : rendered.csv_files) {
    // Perplexity is plotted per seed, the tables use the best seed.
    if (name == "fig_perplexity.csv") {
      const RenderedReport per_seed = render_report(all, {}, ReportLayout::kAll);
      for (const auto& [n2, c2] : per_seed.csv_files) {
        if (n2 == name) log.write(paths.report() / name, c2);
      }
      continue;
    }
    log.write(paths.report() / name, csv);
  }
  std::string best_jsonl;
  for (const auto& r : best) best_jsonl += nlohmann::json::parse(r.to_json_text()).dump() + "\n";
  log.write(paths.report() / "best_of_seeds.jsonl", best_jsonl);
  log.finish();
}

void run_command(std::string_view command, const PipelineConfig& config, const RunOptions& options) {
  if (command == "ingest") return run_ingest(config, options);
  if (command == "gen-chains") return run_gen_chains(config, options);
  if (command == "emit-corpus") return run_emit_corpus(config, options);
  if (command == "eval") return run_eval(config, options);
  if (command == "intervene") return run_intervene(config, options);
  if (command == "ppl") return run_ppl(config, options);
  if (command == "report") return run_report(config, options);
  throw Error(ErrorCode::kInvalidArgument, "unknown command " + std::string(command));
}

fs::path write_synthetic_workspace(const fs::path& dir, std::size_t records) {
  const auto data = synthetic_dataset(records);
  write_file(dir / "synthetic.csv", records_to_csv(data));
  write_file(dir / "schema.json", synthetic_schema().to_json_text());

  static constexpr std::string_view kWords[] = {
      "the",   "a",       "river",  "city",    "was",    "built", "near",   "old",     "bridge", "and",
      "many",  "people",  "came",   "to",      "trade",  "in",    "market", "during",  "summer", "of",
      "north", "village", "school", "opened",  "after",  "war",   "its",    "library", "held",   "books",
      "on",    "history", "music",  "science", "region", "known", "for",    "mild",    "winter", "season"};
  std::mt19937_64 rng(20260101);
  std::string text;
  for (int doc = 0; doc < 12; ++doc) {
    for (int sentence = 0; sentence < 6; ++sentence) {
      const int len = 8 + static_cast<int>(rng() % 9);
      for (int w = 0; w < len; ++w) {
        if (w > 0) text += ' ';
        text += kWords[rng() % std::size(kWords)];
      }
      text += sentence == 5 ? ".\n" : ". ";
    }
    text += "\n";
  }
  write_file(dir / "heldout.txt", text);

  ojson config{
      {"dataset", {{"path", "synthetic.csv"}, {"schema_path", "schema.json"}}},
      {"grid",
       {{"tasks", {"mfc", "judgment", "joint"}},
        {"settings", {"base", "base_plus", "ours"}},
        {"sizes", {20, 5000}},
        {"seeds", {1, 2}}}},
      {"teacher", {{"name", "teacher"}, {"base_url", "https://api.deepseek.com"}, {"model", "deepseek-chat"},
                   {"api_key_env", "DEEPSEEK_API_KEY"}}},
      {"model_under_test",
       {{"name", "model"},
        {"label", "stub-1B"},
        {"base_url", "http://127.0.0.1:8000"},
        {"model", "stub-1B-{task}-{setting}-{size}-s{seed}"},
        {"chat_path", "/v1/chat/completions"}}},
      {"cache_dir", "cache"},
      {"output_dir", "out"},
      {"requests", {{"max_in_flight", 4}}},
      {"evaluation", {{"split", "dev"}, {"scoring_mode", "exact_set"}}},
      {"perplexity", {{"corpus", "heldout.txt"}, {"window", 64}, {"stride", 32}}}};
  const fs::path path = dir / "config.json";
  write_file(path, config.dump(2) + "\n");
  return path;
}

}  // namespace moralchain
