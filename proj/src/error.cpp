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

#include "moralchain/error.hpp"

namespace moralchain {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNoFoundationFound: return "NoFoundationFound";
    case ErrorCode::kEmptyFoundationSet: return "EmptyFoundationSet";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kMissingChain: return "MissingChain";
    case ErrorCode::kUnexpectedChain: return "UnexpectedChain";
    case ErrorCode::kEndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::kEndpointRejected: return "EndpointRejected";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kMalformedChain: return "MalformedChain";
    case ErrorCode::kChainGenerationFailed: return "ChainGenerationFailed";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMismatchedIds: return "MismatchedIds";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kPositiveLogprob: return "PositiveLogprob";
    case ErrorCode::kHeterogeneousCell: return "HeterogeneousCell";
    case ErrorCode::kNoFoundationSpan: return "NoFoundationSpan";
    case ErrorCode::kCorpusInvalid: return "CorpusInvalid";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace moralchain
