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

#include "moralchain/teacher.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <ctime>
#include <nlohmann/json.hpp>
#include <thread>

#include "moralchain/error.hpp"
#include "moralchain/io.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void CompletionRequest::validate() const {
  if (params.max_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be at least 1");
  }
  if (!(params.temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be non-negative");
  }
}

std::string CompletionRequest::canonical_json() const {
  nlohmann::ordered_json j{{"endpoint_id", endpoint_id},
                           {"prompt", prompt},
                           {"max_tokens", params.max_tokens},
                           {"temperature", params.temperature},
                           {"stop", params.stop}};
  return j.dump();
}

std::string CompletionRequest::cache_key() const { return sha256_hex(canonical_json()); }

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::optional<std::string> ResponseCache::lookup(const CompletionRequest& request) {
  const std::string key = request.cache_key();
  std::lock_guard lock(mu_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (!dir_) return std::nullopt;
  const auto path = *dir_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    auto response = j.at("response").get<std::string>();
    memory_.emplace(key, response);
    return response;
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ResponseCache::store(const CompletionRequest& request, const std::string& response) {
  const std::string key = request.cache_key();
  std::lock_guard lock(mu_);
  memory_[key] = response;
  if (!dir_) return;
  nlohmann::ordered_json j{{"request", nlohmann::ordered_json::parse(request.canonical_json())},
                           {"response", response},
                           {"timestamp", utc_timestamp()}};
  write_file(*dir_ / (key + ".json"), j.dump(2) + "\n");
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return memory_.size();
}

CompletionClient::CompletionClient(std::shared_ptr<CompletionBackend> backend,
                                   std::shared_ptr<ResponseCache> cache, ClientOptions options)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      options_(options) {}

std::string CompletionClient::complete(const CompletionRequest& request) {
  request.validate();
  if (auto hit = cache_->lookup(request)) {
    ++cache_hits_;
    return *hit;
  }
  const std::string key = request.cache_key();
  std::promise<std::string> promise;
  std::shared_future<std::string> pending;
  {
    std::lock_guard lock(inflight_mu_);
    if (auto it = inflight_.find(key); it != inflight_.end()) {
      pending = it->second;
    } else {
      inflight_.emplace(key, promise.get_future().share());
    }
  }
  if (pending.valid()) {
    ++cache_hits_;
    return pending.get();
  }
  auto finish = [&] {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
  };
  try {
    std::string text;
    if (auto hit = cache_->lookup(request)) {
      ++cache_hits_;
      text = *hit;
    } else {
      text = fetch(request);
      cache_->store(request, text);
    }
    promise.set_value(text);
    finish();
    return text;
  } catch (...) {
    promise.set_exception(std::current_exception());
    finish();
    throw;
  }
}

void CompletionClient::pace() {
  if (options_.requests_per_second <= 0.0) return;
  const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.requests_per_second));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(pace_mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + spacing;
  }
  std::this_thread::sleep_until(slot);
}

std::string CompletionClient::fetch(const CompletionRequest& request) {
  auto delay = options_.retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    const std::size_t issued = network_calls_.fetch_add(1);
    if (options_.request_cap && issued >= *options_.request_cap) {
      --network_calls_;
      throw Error(ErrorCode::kBudgetExceeded,
                  "request cap of " + std::to_string(*options_.request_cap) + " reached");
    }
    pace();
    std::string text;
    try {
      text = backend_->send(request);
    } catch (const TransientError& e) {
      if (attempt >= options_.retry.max_retries) {
        throw Error(ErrorCode::kEndpointUnreachable,
                    request.endpoint_id + " unreachable after " + std::to_string(attempt + 1) +
                        " attempts: " + e.what());
      }
      spdlog::debug("transient failure from {}: {}; retrying", request.endpoint_id, e.what());
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      delay = std::min(options_.retry.max_backoff,
                       std::chrono::milliseconds(static_cast<std::chrono::milliseconds::rep>(
                           static_cast<double>(delay.count()) * options_.retry.multiplier)));
      continue;
    }
    if (text::trim(text).empty()) {
      throw Error(ErrorCode::kEmptyCompletion, request.endpoint_id + " returned an empty completion");
    }
    return text;
  }
}

std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t max_in_flight,
                                             const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(n, std::max<std::size_t>(1, max_in_flight));
  if (threads <= 1) {
    worker();
    return errors;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return errors;
}

int foundation_step(TaskKind task) noexcept { return task == TaskKind::kJoint ? 2 : 3; }

std::string chain_gold_violation(const InferenceChain& chain, const FoundationSet& gold,
                                 TaskKind task) {
  const std::string& step = foundation_step(task) == 2 ? chain.step2 : chain.step3;
  FoundationSet named;
  for (const auto& m : find_foundation_mentions(step)) named.insert(m.foundation);
  for (Foundation f : gold) {
    if (!named.contains(f)) {
      return "step " + std::to_string(foundation_step(task)) + " does not mention " +
             std::string(foundation_name(f));
    }
  }
  return {};
}

InferenceChain generate_chain(CompletionClient& client, const MicRecord& record, TaskKind task,
                              const GenerationOptions& options) {
  CompletionRequest request;
  request.endpoint_id = options.endpoint_id;
  request.prompt = build_teacher_prompt(record, task);
  request.params = options.decoding;
  std::string last_problem;
  for (int attempt = 0; attempt <= options.max_regens; ++attempt) {
    request.params.temperature =
        std::min(options.max_temperature, options.decoding.temperature + attempt * options.temperature_step);
    std::string raw;
    try {
      raw = client.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCompletion) throw;
      last_problem = e.what();
      continue;
    }
    try {
      InferenceChain chain = segment_chain(raw);
      last_problem = chain_gold_violation(chain, record.gold_foundations, task);
      if (last_problem.empty()) return chain;
    } catch (const Error& e) {
      last_problem = e.what();
    }
  }
  throw Error(ErrorCode::kChainGenerationFailed,
              "record " + record.id + ": " + std::to_string(options.max_regens + 1) +
                  " attempts failed; last problem: " + last_problem);
}

}  // namespace moralchain
