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

#include "moralchain/chain.hpp"

#include <array>
#include <optional>

#include "moralchain/error.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

std::optional<InferenceChain> split_at(std::string_view raw,
                                       const std::array<std::string_view, 3>& markers) {
  std::array<std::size_t, 3> at{};
  std::size_t from = 0;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const std::size_t pos = raw.find(markers[i], from);
    if (pos == std::string_view::npos) return std::nullopt;
    at[i] = pos;
    from = pos + markers[i].size();
  }
  auto span = [&](std::size_t i) {
    const std::size_t begin = at[i] + markers[i].size();
    const std::size_t end = i + 1 < at.size() ? at[i + 1] : raw.size();
    return std::string(text::trim(raw.substr(begin, end - begin)));
  };
  InferenceChain chain{span(0), span(1), span(2), std::string(raw)};
  if (chain.step1.empty() || chain.step2.empty() || chain.step3.empty()) return std::nullopt;
  return chain;
}

}  // namespace

std::string InferenceChain::render() const {
  return "(1) " + step1 + " (2) " + step2 + " (3) " + step3;
}

InferenceChain make_chain(std::string step1, std::string step2, std::string step3) {
  InferenceChain c{std::move(step1), std::move(step2), std::move(step3), {}};
  c.raw = c.render();
  return c;
}

InferenceChain segment_chain(std::string_view raw) {
  if (auto c = split_at(raw, {"(1)", "(2)", "(3)"})) return *c;
  if (auto c = split_at(raw, {"(a)", "(b)", "(c)"})) return *c;
  throw Error(ErrorCode::kMalformedChain, "inference chain lacks three ordered step markers");
}

}  // namespace moralchain
