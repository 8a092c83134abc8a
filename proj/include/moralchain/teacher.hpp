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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "moralchain/chain.hpp"
#include "moralchain/dataset.hpp"
#include "moralchain/prompts.hpp"

namespace moralchain {

struct DecodingParams {
  int max_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop;
};

struct CompletionRequest {
  std::string endpoint_id;
  std::string prompt;
  DecodingParams params;

  // Throws Error(kInvalidArgument) if max_tokens < 1 or temperature < 0.
  void validate() const;
  // Deterministic JSON rendering of every field that affects the response.
  std::string canonical_json() const;
  // SHA-256 of canonical_json().
  std::string cache_key() const;
};

// Thrown by backends for failures worth retrying (connection errors, 429, 5xx).
class TransientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string send(const CompletionRequest& request) = 0;
};

struct ScoreRequest {
  std::string endpoint_id;
  std::string text;
  int window = 512;
  int stride = 512;
};

// Returns one natural-log probability per scored token of `text`.
class ScoringBackend {
 public:
  virtual ~ScoringBackend() = default;
  virtual std::vector<double> score(const ScoreRequest& request) = 0;
};

// Content-addressed response store. With a directory, each entry is one
// <cache_key>.json file holding request, response and timestamp; without one
// the cache lives in memory only.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<std::string> lookup(const CompletionRequest& request);
  void store(const CompletionRequest& request, const std::string& response);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> memory_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
};

struct ClientOptions {
  RetryPolicy retry;
  // Total network attempts allowed over the client's lifetime.
  std::optional<std::size_t> request_cap;
  // Minimum spacing between attempt starts; 0 disables the limit.
  double requests_per_second = 0.0;
  std::size_t max_in_flight = 8;
};

// Thread-safe completion client. Identical requests issued concurrently are
// coalesced into one network call.
class CompletionClient {
 public:
  CompletionClient(std::shared_ptr<CompletionBackend> backend, std::shared_ptr<ResponseCache> cache,
                   ClientOptions options = {});

  // Errors: kEndpointUnreachable after the retry budget, kEndpointRejected for
  // non-retryable HTTP failures, kBudgetExceeded, kEmptyCompletion.
  std::string complete(const CompletionRequest& request);

  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  const ClientOptions& options() const { return options_; }

 private:
  std::string fetch(const CompletionRequest& request);
  void pace();

  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  ClientOptions options_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<std::string>> inflight_;
  std::mutex pace_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

// Runs fn(i) for i in [0, n) on at most `max_in_flight` threads. The returned
// vector holds the exception (or null) for each index, in index order.
std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t max_in_flight,
                                             const std::function<void(std::size_t)>& fn);

struct GenerationOptions {
  std::string endpoint_id = "teacher";
  DecodingParams decoding;
  int max_regens = 2;
  double temperature_step = 0.3;
  double max_temperature = 1.0;
};

// Step holding the foundation linkage checked against the gold set: step 3
// for mfc and judgment, step 2 for joint.
int foundation_step(TaskKind task) noexcept;

// Builds the task's teacher prompt, completes and segments it. Malformed or
// gold-inconsistent answers are regenerated up to max_regens times with rising
// temperature; after that throws Error(kChainGenerationFailed).
InferenceChain generate_chain(CompletionClient& client, const MicRecord& record, TaskKind task,
                              const GenerationOptions& options);

// Empty string when `chain` names every gold foundation in its foundation
// step; otherwise the reason it does not.
std::string chain_gold_violation(const InferenceChain& chain, const FoundationSet& gold,
                                 TaskKind task);

struct EndpointConfig {
  std::string name = "endpoint";
  std::string base_url;                    // e.g. https://api.deepseek.com
  std::string model;
  std::string chat_path = "/chat/completions";
  std::string score_path = "/v1/score";
  std::string api_key_env;                 // environment variable holding the bearer token
  int timeout_seconds = 120;

  std::string endpoint_id() const { return name + ":" + model + "@" + base_url; }
};

// OpenAI-style chat completion over HTTP(S): one user message, plain-text
// answer from choices[0].message.content.
std::shared_ptr<CompletionBackend> make_http_completion_backend(const EndpointConfig& config);

// POST {model, text, window, stride} to score_path; expects {"token_logprobs": [...]}.
std::shared_ptr<ScoringBackend> make_http_scoring_backend(const EndpointConfig& config,
                                                          RetryPolicy retry = {});

}  // namespace moralchain
