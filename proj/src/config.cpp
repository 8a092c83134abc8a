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

#include "moralchain/config.hpp"

#include <initializer_list>
#include <nlohmann/json.hpp>

#include "moralchain/error.hpp"
#include "moralchain/io.hpp"

namespace moralchain {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCode::kInvalidConfig, message); }

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) bad("unknown key \"" + key + "\" in " + std::string(where));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

DecodingParams read_decoding(const json& j, DecodingParams d, std::string_view where) {
  check_keys(j, where, {"max_tokens", "temperature", "stop"});
  d.max_tokens = j.value("max_tokens", d.max_tokens);
  d.temperature = j.value("temperature", d.temperature);
  d.stop = j.value("stop", d.stop);
  return d;
}

EndpointConfig read_endpoint(const json& j, std::string_view where, DecodingParams& decoding) {
  check_keys(j, where,
             {"name", "base_url", "model", "chat_path", "score_path", "api_key_env", "timeout_seconds", "decoding"});
  EndpointConfig e;
  e.name = j.value("name", std::string(where));
  e.base_url = j.value("base_url", e.base_url);
  e.model = j.value("model", e.model);
  e.chat_path = j.value("chat_path", e.chat_path);
  e.score_path = j.value("score_path", e.score_path);
  e.api_key_env = j.value("api_key_env", e.api_key_env);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  if (j.contains("decoding")) decoding = read_decoding(j["decoding"], decoding, std::string(where) + ".decoding");
  return e;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    bad(std::string("cannot read config: ") + e.what());
  }
  PipelineConfig c = parse(text, fs::absolute(path).parent_path());
  c.source = path;
  c.digest = sha256_hex(text);
  return c;
}

PipelineConfig PipelineConfig::parse(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  c.digest = sha256_hex(json_text);
  try {
    check_keys(j, "config",
               {"dataset", "grid", "teacher", "model_under_test", "cache_dir", "output_dir", "generation", "requests",
                "evaluation", "perplexity"});

    if (!j.contains("dataset")) bad("missing \"dataset\"");
    const auto& d = j["dataset"];
    check_keys(d, "dataset", {"path", "schema", "schema_path"});
    if (!d.contains("path")) bad("missing dataset.path");
    c.dataset = resolve(base_dir, d["path"].get<std::string>());
    if (d.contains("schema") && d.contains("schema_path")) bad("give dataset.schema or dataset.schema_path, not both");
    if (d.contains("schema")) c.schema = ColumnSchema::from_json_text(d["schema"].dump());
    if (d.contains("schema_path")) c.schema = ColumnSchema::load(resolve(base_dir, d["schema_path"].get<std::string>()));

    if (j.contains("grid")) {
      const auto& g = j["grid"];
      check_keys(g, "grid", {"tasks", "settings", "sizes", "seeds"});
      if (g.contains("tasks")) {
        c.grid.tasks.clear();
        for (const auto& t : g["tasks"]) {
          const auto task = task_from_name(t.get<std::string>());
          if (!task) bad("unknown task " + t.dump());
          c.grid.tasks.push_back(*task);
        }
      }
      if (g.contains("settings")) {
        c.grid.settings.clear();
        for (const auto& s : g["settings"]) {
          const auto setting = setting_from_name(s.get<std::string>());
          if (!setting) bad("unknown setting " + s.dump());
          c.grid.settings.push_back(*setting);
        }
      }
      if (g.contains("sizes")) {
        c.grid.sizes.clear();
        for (const auto& s : g["sizes"]) {
          if (!s.is_number_integer() || s.get<long long>() <= 0) bad("grid sizes must be positive integers");
          c.grid.sizes.push_back(s.get<std::size_t>());
        }
      }
      if (g.contains("seeds")) {
        c.grid.seeds.clear();
        for (const auto& s : g["seeds"]) {
          if (!s.is_number_unsigned()) bad("grid seeds must be non-negative integers");
          c.grid.seeds.push_back(s.get<std::uint64_t>());
        }
      }
    }

    c.teacher.name = "teacher";
    c.model_under_test.name = "model";
    if (j.contains("teacher")) c.teacher = read_endpoint(j["teacher"], "teacher", c.teacher_decoding);
    if (j.contains("model_under_test")) {
      json m = j["model_under_test"];
      if (m.is_object() && m.contains("label")) {
        c.model_label = m["label"].get<std::string>();
        m.erase("label");
      }
      c.model_under_test = read_endpoint(m, "model_under_test", c.model_decoding);
    }

    if (c.model_label.empty()) c.model_label = c.model_under_test.name;

    if (j.contains("cache_dir") && !j["cache_dir"].is_null()) {
      c.cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));

    if (j.contains("generation")) {
      const auto& g = j["generation"];
      check_keys(g, "generation", {"max_regens", "temperature_step", "max_temperature"});
      c.max_regens = g.value("max_regens", c.max_regens);
      c.temperature_step = g.value("temperature_step", c.temperature_step);
      c.max_temperature = g.value("max_temperature", c.max_temperature);
    }

    if (j.contains("requests")) {
      const auto& r = j["requests"];
      check_keys(r, "requests",
                 {"max_in_flight", "request_cap", "requests_per_second", "max_retries", "initial_backoff_ms",
                  "backoff_multiplier", "max_backoff_ms"});
      c.client.max_in_flight = r.value("max_in_flight", c.client.max_in_flight);
      if (r.contains("request_cap") && !r["request_cap"].is_null()) {
        c.client.request_cap = r["request_cap"].get<std::size_t>();
      }
      c.client.requests_per_second = r.value("requests_per_second", c.client.requests_per_second);
      c.client.retry.max_retries = r.value("max_retries", c.client.retry.max_retries);
      c.client.retry.initial_backoff =
          std::chrono::milliseconds(r.value("initial_backoff_ms", c.client.retry.initial_backoff.count()));
      c.client.retry.multiplier = r.value("backoff_multiplier", c.client.retry.multiplier);
      c.client.retry.max_backoff =
          std::chrono::milliseconds(r.value("max_backoff_ms", c.client.retry.max_backoff.count()));
    }

    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      check_keys(e, "evaluation", {"split", "scoring_mode"});
      c.eval_split = e.value("split", c.eval_split);
      const auto mode = e.value("scoring_mode", std::string("exact_set"));
      if (mode == "exact_set") {
        c.scoring_mode = ScoringMode::kExactSet;
      } else if (mode == "per_label") {
        c.scoring_mode = ScoringMode::kPerLabel;
      } else {
        bad("scoring_mode must be exact_set or per_label");
      }
    }

    if (j.contains("perplexity")) {
      const auto& p = j["perplexity"];
      check_keys(p, "perplexity", {"corpus", "window", "stride"});
      if (p.contains("corpus") && !p["corpus"].is_null()) {
        c.perplexity_corpus = resolve(base_dir, p["corpus"].get<std::string>());
      }
      c.perplexity_window = p.value("window", c.perplexity_window);
      c.perplexity_stride = p.value("stride", c.perplexity_stride);
    }
  } catch (const json::exception& e) {
    bad(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  if (grid.tasks.empty()) bad("grid.tasks is empty");
  if (grid.settings.empty()) bad("grid.settings is empty");
  if (grid.sizes.empty()) bad("grid.sizes is empty");
  if (grid.seeds.empty()) bad("grid.seeds is empty");
  for (auto s : grid.sizes) {
    if (s == 0) bad("grid sizes must be positive");
  }
  if (!fs::is_regular_file(dataset)) bad("dataset not found: " + dataset.string());
  if (perplexity_corpus && !fs::is_regular_file(*perplexity_corpus)) {
    bad("perplexity corpus not found: " + perplexity_corpus->string());
  }
  if (perplexity_window < 1 || perplexity_stride < 1 || perplexity_stride > perplexity_window) {
    bad("perplexity needs 0 < stride <= window");
  }
  for (const auto* d : {&teacher_decoding, &model_decoding}) {
    if (d->max_tokens < 1 || d->temperature < 0.0) bad("decoding needs max_tokens >= 1 and temperature >= 0");
  }
  if (max_regens < 0) bad("generation.max_regens must be >= 0");
  if (client.max_in_flight < 1) bad("requests.max_in_flight must be >= 1");
  if (client.retry.max_retries < 0) bad("requests.max_retries must be >= 0");
}

EndpointConfig model_endpoint_for(const PipelineConfig& config, TaskKind task, Setting setting, std::size_t size,
                                  std::uint64_t seed) {
  EndpointConfig e = config.model_under_test;
  replace_all(e.model, "{task}", std::string(task_name(task)));
  replace_all(e.model, "{setting}", std::string(setting_name(setting)));
  replace_all(e.model, "{size}", std::to_string(size));
  replace_all(e.model, "{seed}", std::to_string(seed));
  return e;
}

}  // namespace moralchain
