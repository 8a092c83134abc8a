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

#include <string>
#include <string_view>

namespace moralchain {

// Three ordered step answers for one task instance.
struct InferenceChain {
  std::string step1;
  std::string step2;
  std::string step3;
  std::string raw;

  // "(1) step1 (2) step2 (3) step3"
  std::string render() const;

  friend bool operator==(const InferenceChain&, const InferenceChain&) = default;
};

InferenceChain make_chain(std::string step1, std::string step2, std::string step3);

// Splits `raw` at the first in-order occurrences of "(1)", "(2)", "(3)", or,
// failing that, "(a)", "(b)", "(c)". Steps are trimmed. Throws
// Error(kMalformedChain) when the markers are missing, out of order, or a step
// is empty.
InferenceChain segment_chain(std::string_view raw);

}  // namespace moralchain
