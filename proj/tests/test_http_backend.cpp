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

#include <atomic>
#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "moralchain/error.hpp"
#include "moralchain/teacher.hpp"
#include "support.hpp"

using namespace moralchain;

namespace {

// Local OpenAI-style server. /v1/chat/completions echoes the prompt; the first
// `failures` requests to any path answer `failure_status`.
class LocalServer {
 public:
  LocalServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      last_auth = req.get_header_value("Authorization");
      if (fail(res)) return;
      const auto body = nlohmann::json::parse(req.body);
      last_body = body;
      const std::string prompt = body["messages"][0]["content"];
      nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (fail(res)) return;
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply{{"token_logprobs", {-1.0, -2.0, -0.5}}, {"window", body["window"]}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/broken", [this](const httplib::Request&, httplib::Response& res) {
      ++requests;
      res.set_content("not json", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig endpoint() const {
    EndpointConfig e;
    e.name = "local";
    e.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    e.model = "tiny";
    e.chat_path = "/chat/completions";
    e.score_path = "/score";
    e.timeout_seconds = 5;
    return e;
  }

  std::atomic<int> requests{0};
  std::atomic<int> failures{0};
  int failure_status = 503;
  std::string last_auth;
  nlohmann::json last_body;

 private:
  bool fail(httplib::Response& res) {
    if (failures.load() <= 0) return false;
    --failures;
    res.status = failure_status;
    res.set_content("{\"error\":\"busy\"}", "application/json");
    return true;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

CompletionRequest chat(const std::string& prompt) {
  CompletionRequest r;
  r.endpoint_id = "local";
  r.prompt = prompt;
  r.params.max_tokens = 16;
  r.params.stop = {"###"};
  return r;
}

ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("chat completion round trip with bearer token") {
  LocalServer server;
  ::setenv("MORALCHAIN_TEST_TOKEN", "secret", 1);
  auto config = server.endpoint();
  config.api_key_env = "MORALCHAIN_TEST_TOKEN";
  CompletionClient client(make_http_completion_backend(config), nullptr, testing_support::fast_options());
  CHECK(client.complete(chat("hello")) == "echo: hello");
  CHECK(server.last_auth == "Bearer secret");
  CHECK(server.last_body["model"] == "tiny");
  CHECK(server.last_body["max_tokens"] == 16);
  CHECK(server.last_body["stop"][0] == "###");
  CHECK(server.last_body["messages"][0]["role"] == "user");
}

TEST_CASE("429 and 5xx are retried") {
  LocalServer server;
  server.failures = 2;
  server.failure_status = 429;
  CompletionClient client(make_http_completion_backend(server.endpoint()), nullptr, testing_support::fast_options());
  CHECK(client.complete(chat("again")) == "echo: again");
  CHECK(server.requests == 3);

  server.failures = 100;
  server.failure_status = 502;
  CHECK(error_of([&] { client.complete(chat("down")); }) == ErrorCode::kEndpointUnreachable);
}

TEST_CASE("4xx is rejected without retry") {
  LocalServer server;
  server.failures = 1;
  server.failure_status = 400;
  CompletionClient client(make_http_completion_backend(server.endpoint()), nullptr, testing_support::fast_options());
  CHECK(error_of([&] { client.complete(chat("bad")); }) == ErrorCode::kEndpointRejected);
  CHECK(server.requests == 1);
}

TEST_CASE("malformed responses are rejected") {
  LocalServer server;
  auto config = server.endpoint();
  config.chat_path = "/broken";
  CompletionClient client(make_http_completion_backend(config), nullptr, testing_support::fast_options());
  CHECK(error_of([&] { client.complete(chat("x")); }) == ErrorCode::kEndpointRejected);
}

TEST_CASE("unreachable host") {
  EndpointConfig config;
  config.base_url = "http://127.0.0.1:1";
  config.model = "m";
  config.timeout_seconds = 1;
  CompletionClient client(make_http_completion_backend(config), nullptr, testing_support::fast_options());
  CHECK(error_of([&] { client.complete(chat("x")); }) == ErrorCode::kEndpointUnreachable);
}

TEST_CASE("base_url without scheme") {
  EndpointConfig config;
  config.base_url = "localhost:8000";
  CHECK(error_of([&] { make_http_completion_backend(config); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("scoring endpoint") {
  LocalServer server;
  server.failures = 1;
  RetryPolicy retry;
  retry.initial_backoff = std::chrono::milliseconds(1);
  auto scorer = make_http_scoring_backend(server.endpoint(), retry);
  ScoreRequest req{"local", "a b c", 64, 32};
  const auto lp = scorer->score(req);
  CHECK(lp == std::vector<double>{-1.0, -2.0, -0.5});
  CHECK(server.requests == 2);

  server.failures = 1;
  server.failure_status = 404;
  CHECK(error_of([&] { scorer->score(req); }) == ErrorCode::kEndpointRejected);
}
