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

#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "moralchain/error.hpp"
#include "moralchain/teacher.hpp"

namespace moralchain {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "base_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

class HttpTransport {
 public:
  explicit HttpTransport(EndpointConfig config) : config_(std::move(config)), url_(split_url(config_.base_url)) {
    if (!config_.api_key_env.empty()) {
      if (const char* token = std::getenv(config_.api_key_env.c_str())) token_ = token;
    }
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    httplib::Client client(url_.scheme_host_port);
    client.set_connection_timeout(std::chrono::seconds(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = client.Post(url_.path_prefix + path, headers, body.dump(), "application/json");
    if (!res) throw TransientError("HTTP error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
      throw TransientError("HTTP status " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kEndpointRejected,
                  config_.endpoint_id() + " answered HTTP " + std::to_string(res->status) + ": " +
                      res->body.substr(0, 512));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kEndpointRejected, "response is not JSON: " + std::string(e.what()));
    }
  }

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  SplitUrl url_;
  std::string token_;
};

class HttpCompletionBackend : public CompletionBackend {
 public:
  explicit HttpCompletionBackend(EndpointConfig config) : transport_(std::move(config)) {}

  std::string send(const CompletionRequest& request) override {
    nlohmann::json body{{"model", transport_.config().model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                        {"max_tokens", request.params.max_tokens},
                        {"temperature", request.params.temperature}};
    if (!request.params.stop.empty()) body["stop"] = request.params.stop;
    const auto reply = transport_.post(transport_.config().chat_path, body);
    try {
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kEndpointRejected, "malformed chat completion: " + std::string(e.what()));
    }
  }

 private:
  HttpTransport transport_;
};

class HttpScoringBackend : public ScoringBackend {
 public:
  HttpScoringBackend(EndpointConfig config, RetryPolicy retry)
      : transport_(std::move(config)), retry_(retry) {}

  std::vector<double> score(const ScoreRequest& request) override {
    const nlohmann::json body{{"model", transport_.config().model},
                              {"text", request.text},
                              {"window", request.window},
                              {"stride", request.stride}};
    auto delay = retry_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      try {
        const auto reply = transport_.post(transport_.config().score_path, body);
        return reply.at("token_logprobs").get<std::vector<double>>();
      } catch (const TransientError& e) {
        if (attempt >= retry_.max_retries) {
          throw Error(ErrorCode::kEndpointUnreachable, transport_.config().endpoint_id() + ": " + e.what());
        }
        std::this_thread::sleep_for(delay);
        delay = std::min(retry_.max_backoff,
                         std::chrono::milliseconds(static_cast<std::chrono::milliseconds::rep>(
                             static_cast<double>(delay.count()) * retry_.multiplier)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kEndpointRejected, "malformed score response: " + std::string(e.what()));
      }
    }
  }

 private:
  HttpTransport transport_;
  RetryPolicy retry_;
};

}  // namespace

std::shared_ptr<CompletionBackend> make_http_completion_backend(const EndpointConfig& config) {
  return std::make_shared<HttpCompletionBackend>(config);
}

std::shared_ptr<ScoringBackend> make_http_scoring_backend(const EndpointConfig& config, RetryPolicy retry) {
  return std::make_shared<HttpScoringBackend>(config, retry);
}

}  // namespace moralchain
