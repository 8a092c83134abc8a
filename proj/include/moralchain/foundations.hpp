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

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moralchain {

// The six moral foundations, declared in canonical order.
enum class Foundation : std::uint8_t {
  kCare = 0,
  kFairness,
  kLiberty,
  kLoyalty,
  kAuthority,
  kSanctity,
};

inline constexpr std::size_t kNumFoundations = 6;

const std::array<Foundation, kNumFoundations>& canonical_foundations() noexcept;

// Lowercase canonical name, e.g. "care".
std::string_view foundation_name(Foundation f) noexcept;
// Capitalized name as used in the definitions block, e.g. "Care".
std::string_view foundation_title(Foundation f) noexcept;
// Definition text, e.g. "wanting someone or something to be safe, healthy, happy."
std::string_view foundation_definition(Foundation f) noexcept;

std::optional<Foundation> foundation_from_name(std::string_view name) noexcept;

// "Care: wanting ... Sanctity: wanting people and things to be clean, pure,
// innocent, and holy." All six, canonical order, single spaces.
const std::string& definitions_block();

// A set of foundations stored as a bitmask, so iteration is always in
// canonical order and duplicates cannot exist. A default-constructed set is
// empty; labelled data requires a nonempty one (see MicRecord).
class FoundationSet {
 public:
  class Iterator {
   public:
    using value_type = Foundation;
    using difference_type = std::ptrdiff_t;

    Iterator() = default;
    Iterator(std::uint8_t bits, int pos) : bits_(bits), pos_(pos) { skip(); }

    Foundation operator*() const { return static_cast<Foundation>(pos_); }
    Iterator& operator++() {
      ++pos_;
      skip();
      return *this;
    }
    Iterator operator++(int) {
      Iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const Iterator& other) const { return pos_ == other.pos_; }

   private:
    void skip() {
      while (pos_ < static_cast<int>(kNumFoundations) && !(bits_ & (1u << pos_))) ++pos_;
    }
    std::uint8_t bits_ = 0;
    int pos_ = static_cast<int>(kNumFoundations);
  };

  FoundationSet() = default;
  FoundationSet(std::initializer_list<Foundation> items) {
    for (Foundation f : items) insert(f);
  }

  static FoundationSet from_bits(std::uint8_t bits) {
    FoundationSet s;
    s.bits_ = bits & kAllBits;
    return s;
  }

  void insert(Foundation f) { bits_ |= bit(f); }
  void erase(Foundation f) { bits_ &= static_cast<std::uint8_t>(~bit(f)); }
  bool contains(Foundation f) const { return (bits_ & bit(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::uint8_t bits() const { return bits_; }

  std::vector<Foundation> to_vector() const { return {begin(), end()}; }

  FoundationSet intersect(const FoundationSet& other) const {
    return from_bits(bits_ & other.bits_);
  }
  FoundationSet unite(const FoundationSet& other) const {
    return from_bits(bits_ | other.bits_);
  }

  Iterator begin() const { return Iterator(bits_, 0); }
  Iterator end() const { return Iterator(bits_, static_cast<int>(kNumFoundations)); }

  friend bool operator==(const FoundationSet&, const FoundationSet&) = default;

 private:
  static constexpr std::uint8_t kAllBits = 0x3f;
  static std::uint8_t bit(Foundation f) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(f));
  }
  std::uint8_t bits_ = 0;
};

// One word-boundary, case-insensitive occurrence of a canonical name.
struct FoundationMention {
  std::size_t begin = 0;
  std::size_t end = 0;
  Foundation foundation = Foundation::kCare;
};

std::vector<FoundationMention> find_foundation_mentions(std::string_view text);

// Throws Error(kNoFoundationFound) if no canonical name occurs in `text`.
FoundationSet parse_foundations(std::string_view text);

// Natural-language list in canonical order: "care", "care and fairness",
// "care, fairness, and sanctity". Throws Error(kEmptyFoundationSet).
std::string format_foundation_list(const FoundationSet& set);

}  // namespace moralchain
