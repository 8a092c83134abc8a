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

#include <algorithm>
#include <set>

#include "moralchain/dataset.hpp"
#include "moralchain/error.hpp"
#include "moralchain/io.hpp"
#include "moralchain/synthetic.hpp"
#include "support.hpp"

using namespace moralchain;
using F = Foundation;

namespace {

const char* kHeader = "id,prompt,reply,rot,foundations,judgment,agreement\n";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

std::vector<MicRecord> numbered(std::size_t n) {
  std::vector<MicRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    MicRecord r;
    r.id = "r" + std::to_string(i);
    r.prompt = "p";
    r.reply = "r";
    r.rot = "x";
    r.gold_foundations = {F::kCare};
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("ingest the worked example row") {
  const std::string csv = std::string(kHeader) +
                          "1,Do people actually shit themselves when they get very scared?,"
                          "\"I don't think I've ever heard of that happening, but I guess it's possible.\","
                          "It is wrong to shit on ourselves.,care,agree,full\n";
  const auto result = ingest_text(csv, ColumnSchema{}, ',');
  REQUIRE(result.records.size() == 1);
  const MicRecord& r = result.records[0];
  CHECK(r.id == "1");
  CHECK(r.reply == "I don't think I've ever heard of that happening, but I guess it's possible.");
  CHECK(r.rot == "It is wrong to shit on ourselves.");
  CHECK(r.gold_foundations == FoundationSet{F::kCare});
  CHECK(r.gold_judgment == Judgment::kAgree);
  CHECK(r.agreement == Agreement::kFull);
  CHECK(result.rejects.empty());
  CHECK_FALSE(result.agreement_defaulted);
}

TEST_CASE("3 valid rows and 1 malformed row") {
  const std::string csv = std::string(kHeader) +
                          "a,p,r,It is bad to lie.,fairness,disagree,full\n"
                          "b,p,r,   ,care,agree,full\n"
                          "c,p,r,It is good to share.,care|loyalty,neutral,partial\n"
                          "d,p,r,It is good to vote.,liberty,Agree,low\n";
  const auto result = ingest_text(csv, ColumnSchema{}, ',');
  CHECK(result.records.size() == 3);
  REQUIRE(result.rejects.size() == 1);
  CHECK(result.rejects[0].row == 2);
  CHECK(result.rejects[0].reason.rfind("MalformedRow", 0) == 0);
  CHECK(rejects_to_jsonl(result.rejects).find("\"row\":2") != std::string::npos);
}

TEST_CASE("rows failing other invariants are rejected, not dropped") {
  const std::string csv = std::string(kHeader) +
                          "a,p,r,x,none,agree,full\n"
                          "b,p,r,x,care,maybe,full\n"
                          "c,p,r,x,care,agree,unsure\n"
                          "d,p,r,x,care,agree\n"
                          "e,,r,x,care,agree,full\n";
  const auto result = ingest_text(csv, ColumnSchema{}, ',');
  CHECK(result.records.empty());
  CHECK(result.rejects.size() == 5);
}

TEST_CASE("quoted fields, TSV and numeric judgment codes") {
  const std::string csv = std::string(kHeader) +
                          "q,\"He said \"\"hi\"\", then left\",\"line one\nline two\",x,sanctity,0,full\n";
  auto result = ingest_text(csv, ColumnSchema{}, ',');
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].prompt == "He said \"hi\", then left");
  CHECK(result.records[0].reply == "line one\nline two");
  CHECK(result.records[0].gold_judgment == Judgment::kDisagree);

  const std::string tsv = "id\tprompt\treply\trot\tfoundations\tjudgment\n"
                          "t\tp, with comma\tr\tx\tcare-harm\t1\n";
  result = ingest_text(tsv, ColumnSchema{}, '\t');
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].prompt == "p, with comma");
  CHECK(result.records[0].gold_judgment == Judgment::kNeutral);
}

TEST_CASE("missing agreement column defaults to full agreement") {
  const std::string csv = "id,prompt,reply,rot,foundations,judgment\na,p,r,x,care,agree\n";
  const auto result = ingest_text(csv, ColumnSchema{}, ',');
  CHECK(result.agreement_defaulted);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].agreement == Agreement::kFull);
}

TEST_CASE("missing required column and unreadable file") {
  const std::string csv = "id,prompt,reply,foundations,judgment\na,p,r,care,agree\n";
  CHECK(code_of([&] { ingest_text(csv, ColumnSchema{}, ','); }) == ErrorCode::kMissingColumn);
  CHECK(code_of([] { ingest("/nonexistent/dir/mic.csv", ColumnSchema{}); }) == ErrorCode::kUnreadableFile);
}

TEST_CASE("schema mapping from JSON") {
  const auto schema = ColumnSchema::from_json_text(
      R"({"id":"sid","prompt":"Q","reply":"A","rot":"RoT","foundations":"moral","judgment":"A_agrees",)"
      R"("agreement":"rot-agree","split":"split","delimiter":"tab"})");
  CHECK(schema.prompt == "Q");
  CHECK(schema.agreement == std::optional<std::string>("rot-agree"));
  CHECK(schema.delimiter == std::optional<char>('\t'));
  CHECK(ColumnSchema::from_json_text(schema.to_json_text()).to_json_text() == schema.to_json_text());
  CHECK(code_of([] { ColumnSchema::from_json_text("[1,2]"); }) == ErrorCode::kInvalidConfig);

  const std::string tsv = "sid\tQ\tA\tRoT\tmoral\tA_agrees\trot-agree\tsplit\n"
                          "1\tp\tr\tx\tcare\t2\tfull\tTest\n";
  testing_support::TempDir dir("schema");
  write_file(dir.path() / "mic.txt", tsv);
  const auto result = ingest(dir.path() / "mic.txt", schema);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].split == "test");
}

TEST_CASE("filter_full_agreement keeps exactly the full rows in order") {
  auto records = numbered(100);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].agreement = i % 4 == 0 ? Agreement::kFull : (i % 2 ? Agreement::kPartial : Agreement::kLow);
  }
  records[1].agreement = Agreement::kFull;
  const auto full = filter_full_agreement(records);
  CHECK(full.size() == 26);
  CHECK(full[0].id == "r0");
  CHECK(full[1].id == "r1");
  CHECK(filter_full_agreement(full) == full);
  const auto all_full = numbered(10);
  CHECK(filter_full_agreement(all_full) == all_full);
}

TEST_CASE("sample_subset is deterministic, nested and an identity when n covers the input") {
  const auto records = numbered(200);
  const auto a = sample_subset(records, 50, 1);
  const auto b = sample_subset(records, 50, 1);
  CHECK(a == b);
  CHECK(a.size() == 50);
  const auto big = sample_subset(records, 120, 1);
  CHECK(std::equal(a.begin(), a.end(), big.begin()));
  std::set<std::string> ids;
  for (const auto& r : big) ids.insert(r.id);
  CHECK(ids.size() == 120);
  CHECK(sample_subset(records, 50, 2) != a);
  CHECK(sample_subset(records, 200, 3) == records);
  CHECK(sample_subset(records, 5000, 3) == records);
  CHECK(code_of([&] { sample_subset(records, 0, 1); }) == ErrorCode::kInvalidArgument);

  const auto queue = sampling_queue(records, 50, 1);
  CHECK(queue.size() == 200);
  CHECK(std::equal(a.begin(), a.end(), queue.begin()));
}

TEST_CASE("sampling_order is a permutation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto order = sampling_order(1000, seed);
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) REQUIRE(order[i] == i);
  }
}

TEST_CASE("compute_stats") {
  auto records = numbered(4);
  records[0].gold_foundations = {F::kCare};
  records[1].gold_foundations = {F::kLoyalty};
  records[2].gold_foundations = {F::kCare, F::kFairness};
  records[3].gold_foundations = {F::kCare, F::kFairness, F::kSanctity};
  const auto s = compute_stats(records);
  CHECK(s.total == 4);
  CHECK(s.cardinality_histogram[1] == 2);
  CHECK(s.cardinality_histogram[2] == 1);
  CHECK(s.cardinality_histogram[3] == 1);
  CHECK(s.single_counts[static_cast<int>(F::kCare)] == 1);
  CHECK(s.inclusion_proportion(F::kCare) == doctest::Approx(0.75));
  CHECK(DatasetStats::from_json_text(s.to_json_text()) == s);

  const auto empty = compute_stats({});
  CHECK(empty.total == 0);
  CHECK(empty.inclusion_proportion(F::kCare) == 0.0);

  auto ten = numbered(10);
  for (std::size_t i = 0; i < ten.size(); ++i) ten[i].gold_foundations = i < 4 ? FoundationSet{F::kCare} : FoundationSet{F::kFairness};
  CHECK(compute_stats(ten).inclusion_proportion(F::kCare) == doctest::Approx(0.4));
}

TEST_CASE("normalized store round trip") {
  const auto records = synthetic_dataset();
  CHECK(records_from_jsonl(records_to_jsonl(records)) == records);
}

TEST_CASE("synthetic dataset coverage and CSV round trip") {
  const auto records = synthetic_dataset();
  REQUIRE(records.size() == 50);
  std::set<Judgment> judgments;
  FoundationSet seen;
  std::set<std::size_t> cardinalities;
  for (const auto& r : records) {
    CHECK(record_violation(r).empty());
    judgments.insert(r.gold_judgment);
    seen = seen.unite(r.gold_foundations);
    cardinalities.insert(r.gold_foundations.size());
  }
  CHECK(judgments.size() == 3);
  CHECK(seen.size() == 6);
  CHECK(cardinalities == std::set<std::size_t>{1, 2, 3});
  const auto back = ingest_text(records_to_csv(records), synthetic_schema(), ',');
  CHECK(back.rejects.empty());
  CHECK(back.records == records);
  CHECK(synthetic_dataset() == records);
}
