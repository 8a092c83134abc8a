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

// Scripted endpoints and temp directories for tests.

#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>

#include "moralchain/error.hpp"
#include "moralchain/teacher.hpp"

namespace testing_support {

// Each send() pops the next scripted step: a response, or a transient or
// permanent failure. Once the script is exhausted the fallback answers.
class ScriptedBackend : public moralchain::CompletionBackend {
 public:
  enum class Kind { kText, kTransient, kReject };
  struct Step {
    Kind kind = Kind::kText;
    std::string text;
  };

  std::string fallback = "(1) a (2) b (3) c";

  void push_text(std::string t) { script_.push_back({Kind::kText, std::move(t)}); }
  void push_transient(int n = 1) {
    for (int i = 0; i < n; ++i) script_.push_back({Kind::kTransient, {}});
  }
  void push_reject() { script_.push_back({Kind::kReject, {}}); }

  std::string send(const moralchain::CompletionRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls;
    temperatures.push_back(request.params.temperature);
    if (script_.empty()) return fallback;
    Step s = script_.front();
    script_.pop_front();
    switch (s.kind) {
      case Kind::kTransient:
        throw moralchain::TransientError("scripted outage");
      case Kind::kReject:
        throw moralchain::Error(moralchain::ErrorCode::kEndpointRejected, "scripted rejection");
      case Kind::kText:
        break;
    }
    return s.text;
  }

  std::atomic<int> calls{0};
  std::vector<double> temperatures;

 private:
  std::mutex mu_;
  std::deque<Step> script_;
};

// Answers through a function; counts calls.
class FunctionBackend : public moralchain::CompletionBackend {
 public:
  explicit FunctionBackend(std::function<std::string(const moralchain::CompletionRequest&)> fn) : fn_(std::move(fn)) {}
  std::string send(const moralchain::CompletionRequest& request) override {
    ++calls;
    return fn_(request);
  }
  std::atomic<int> calls{0};

 private:
  std::function<std::string(const moralchain::CompletionRequest&)> fn_;
};

inline moralchain::ClientOptions fast_options() {
  moralchain::ClientOptions o;
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  o.retry.max_backoff = std::chrono::milliseconds(2);
  return o;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("moralchain-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
