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

#include "moralchain/foundations.hpp"

#include <bit>

#include "moralchain/error.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

struct FoundationInfo {
  std::string_view name;
  std::string_view title;
  std::string_view definition;
};

constexpr std::array<FoundationInfo, kNumFoundations> kInfo{{
    {"care", "Care", "wanting someone or something to be safe, healthy, happy."},
    {"fairness", "Fairness", "wanting to see individuals or groups treated equally or equitably."},
    {"liberty", "Liberty", "wanting people to be free to make their own decisions."},
    {"loyalty", "Loyalty",
     "wanting unity and seeing people keep promises or obligations to an in-group."},
    {"authority", "Authority", "wanting to respect social roles, duties, privacy, peace, and order."},
    {"sanctity", "Sanctity", "wanting people and things to be clean, pure, innocent, and holy."},
}};

const FoundationInfo& info(Foundation f) { return kInfo[static_cast<std::size_t>(f)]; }

}  // namespace

const std::array<Foundation, kNumFoundations>& canonical_foundations() noexcept {
  static constexpr std::array<Foundation, kNumFoundations> kAll{
      Foundation::kCare,    Foundation::kFairness,  Foundation::kLiberty,
      Foundation::kLoyalty, Foundation::kAuthority, Foundation::kSanctity,
  };
  return kAll;
}

std::string_view foundation_name(Foundation f) noexcept { return info(f).name; }
std::string_view foundation_title(Foundation f) noexcept { return info(f).title; }
std::string_view foundation_definition(Foundation f) noexcept { return info(f).definition; }

std::optional<Foundation> foundation_from_name(std::string_view name) noexcept {
  const std::string lowered = text::to_lower(text::trim(name));
  for (Foundation f : canonical_foundations()) {
    if (lowered == foundation_name(f)) return f;
  }
  return std::nullopt;
}

const std::string& definitions_block() {
  static const std::string block = [] {
    std::string out;
    for (Foundation f : canonical_foundations()) {
      if (!out.empty()) out += ' ';
      out += foundation_title(f);
      out += ": ";
      out += foundation_definition(f);
    }
    return out;
  }();
  return block;
}

std::size_t FoundationSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<FoundationMention> find_foundation_mentions(std::string_view text) {
  std::vector<FoundationMention> mentions;
  const std::string lowered = text::to_lower(text);
  for (std::size_t pos = 0; pos < lowered.size();) {
    if (!text::is_word_char(lowered[pos]) || (pos > 0 && text::is_word_char(lowered[pos - 1]))) {
      ++pos;
      continue;
    }
    std::size_t word_end = pos;
    while (word_end < lowered.size() && text::is_word_char(lowered[word_end])) ++word_end;
    const std::string_view word(lowered.data() + pos, word_end - pos);
    for (Foundation f : canonical_foundations()) {
      if (word == foundation_name(f)) {
        mentions.push_back({pos, word_end, f});
        break;
      }
    }
    pos = word_end;
  }
  return mentions;
}

FoundationSet parse_foundations(std::string_view text) {
  FoundationSet set;
  for (const auto& m : find_foundation_mentions(text)) set.insert(m.foundation);
  if (set.empty()) {
    throw Error(ErrorCode::kNoFoundationFound, "no moral foundation named in text");
  }
  return set;
}

std::string format_foundation_list(const FoundationSet& set) {
  if (set.empty()) {
    throw Error(ErrorCode::kEmptyFoundationSet, "cannot format an empty foundation set");
  }
  const auto items = set.to_vector();
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      if (items.size() == 2) {
        out += " and ";
      } else if (i + 1 == items.size()) {
        out += ", and ";
      } else {
        out += ", ";
      }
    }
    out += foundation_name(items[i]);
  }
  return out;
}

}  // namespace moralchain
