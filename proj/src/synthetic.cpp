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

#include "moralchain/synthetic.hpp"

#include <array>
#include <string_view>

namespace moralchain {
namespace {

struct Scenario {
  std::string_view question;
  std::string_view action;
  std::string_view reply;
};

constexpr std::array<Scenario, 10> kScenarios{{
    {"Do people actually shit themselves when they get very scared?", "shit on ourselves",
     "I don't think I've ever heard of that happening, but I guess it's possible."},
    {"Why don't we just print a bunch of money to pay off our massive world debt?",
     "print money to pay off debt",
     "Because the value of that money then becomes less and less, so things get ugly."},
    {"Is it fine to read my roommate's diary while she is out?", "read someone else's diary",
     "Sure, if she left it on the table it is basically public."},
    {"Should I tell my boss that my coworker lied on his timesheet?", "report a coworker who lies",
     "Honestly you should stay out of it and mind your own business."},
    {"Can I skip my friend's wedding to go to a concert?", "skip a friend's wedding",
     "Your friend will understand, concerts are once in a lifetime."},
    {"Is it okay to cut in line at the pharmacy if I'm in a hurry?", "cut in line",
     "Everyone is in a hurry, you should wait your turn like the rest."},
    {"Why Don't video plays have a real time clock in the control bar?",
     "design a control bar that hides the clock",
     "Because the control bar does not support a time clock. Instead it simply counts up time."},
    {"What do you think about people who throw trash in the river?", "throw trash in the river",
     "It is disgusting and it poisons the water for everyone downstream."},
    {"Should parents pick their kids' college major for them?", "pick a child's major for them",
     "Kids should decide for themselves, it is their life after all."},
    {"Is it rude to ignore a call from my grandmother?", "ignore calls from family",
     "A little, she probably just wants to hear your voice."},
}};

// Gold sets by index; care appears in about 40% of rows, sanctity rarely.
const std::array<FoundationSet, 25>& gold_patterns() {
  using F = Foundation;
  static const std::array<FoundationSet, 25> kPatterns{{
      {F::kCare},
      {F::kCare, F::kFairness, F::kSanctity},
      {F::kLiberty},
      {F::kFairness},
      {F::kLoyalty},
      {F::kCare},
      {F::kLoyalty},
      {F::kSanctity},
      {F::kAuthority},
      {F::kCare, F::kLoyalty},
      {F::kFairness, F::kAuthority},
      {F::kCare},
      {F::kLiberty, F::kAuthority},
      {F::kCare, F::kFairness},
      {F::kFairness},
      {F::kCare},
      {F::kAuthority},
      {F::kLiberty},
      {F::kCare, F::kSanctity},
      {F::kLoyalty, F::kAuthority, F::kFairness},
      {F::kCare},
      {F::kFairness, F::kLiberty},
      {F::kCare, F::kAuthority, F::kLoyalty},
      {F::kSanctity, F::kLiberty},
      {F::kAuthority},
  }};
  return kPatterns;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<MicRecord> synthetic_dataset(std::size_t n) {
  static constexpr std::array<std::string_view, 3> kRotStance{"It is wrong to ", "It is good to ",
                                                              "You shouldn't "};
  std::vector<MicRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Scenario& sc = kScenarios[i % kScenarios.size()];
    MicRecord r;
    r.id = "syn-" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") + std::to_string(i);
    r.prompt = std::string(sc.question);
    if (i >= kScenarios.size()) r.prompt += " (case " + std::to_string(i / kScenarios.size()) + ")";
    r.reply = std::string(sc.reply);
    r.rot = std::string(kRotStance[i % kRotStance.size()]) + std::string(sc.action) + ".";
    r.gold_foundations = gold_patterns()[(i * 7) % gold_patterns().size()];
    r.gold_judgment = kAllJudgments[(i / 2) % kAllJudgments.size()];
    if (i % 17 == 7) {
      r.agreement = Agreement::kPartial;
    } else if (i % 23 == 11) {
      r.agreement = Agreement::kLow;
    }
    r.split = i % 5 == 2 ? "dev" : "train";
    out.push_back(std::move(r));
  }
  return out;
}

std::string records_to_csv(std::span<const MicRecord> records) {
  std::string out = "id,prompt,reply,rot,foundations,judgment,agreement,split\n";
  for (const auto& r : records) {
    std::string found;
    for (Foundation f : r.gold_foundations) {
      if (!found.empty()) found += '|';
      found += foundation_name(f);
    }
    out += csv_field(r.id) + ',' + csv_field(r.prompt) + ',' + csv_field(r.reply) + ',' +
           csv_field(r.rot) + ',' + found + ',' + std::string(judgment_name(r.gold_judgment)) + ',' +
           std::string(agreement_name(r.agreement)) + ',' + r.split + '\n';
  }
  return out;
}

ColumnSchema synthetic_schema() {
  ColumnSchema s;
  s.split = "split";
  s.delimiter = ',';
  return s;
}

}  // namespace moralchain
