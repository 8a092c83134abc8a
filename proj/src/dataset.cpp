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

#include "moralchain/dataset.hpp"

#include <spdlog/spdlog.h>

#include <nlohmann/json.hpp>
#include <random>

#include "moralchain/error.hpp"
#include "moralchain/io.hpp"
#include "text_util.hpp"

namespace moralchain {
namespace {

using Row = std::vector<std::string>;

// RFC 4180 style: quoted fields may hold delimiters, doubled quotes and
// newlines. CRLF and LF line endings are both accepted.
std::vector<Row> read_delimited(std::string_view content, char delim) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (!field.empty() || !row.empty() || field_started) end_row();
  return rows;
}

std::size_t column_index(const Row& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::trim(header[i]) == name) return i;
  }
  throw Error(ErrorCode::kMissingColumn, "column '" + name + "' not found in header");
}

std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t range) {
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % range;
  }
}

}  // namespace

std::string_view judgment_name(Judgment j) noexcept {
  switch (j) {
    case Judgment::kAgree: return "agree";
    case Judgment::kNeutral: return "neutral";
    case Judgment::kDisagree: return "disagree";
  }
  return "agree";
}

std::string_view judgment_title(Judgment j) noexcept {
  switch (j) {
    case Judgment::kAgree: return "Agree";
    case Judgment::kNeutral: return "Neutral";
    case Judgment::kDisagree: return "Disagree";
  }
  return "Agree";
}

std::optional<Judgment> judgment_from_label(std::string_view label) noexcept {
  const std::string l = text::to_lower(text::trim(label));
  if (l == "agree" || l == "2") return Judgment::kAgree;
  if (l == "neutral" || l == "1") return Judgment::kNeutral;
  if (l == "disagree" || l == "0") return Judgment::kDisagree;
  return std::nullopt;
}

std::string_view agreement_name(Agreement a) noexcept {
  switch (a) {
    case Agreement::kFull: return "full";
    case Agreement::kPartial: return "partial";
    case Agreement::kLow: return "low";
  }
  return "full";
}

std::optional<Agreement> agreement_from_label(std::string_view label) noexcept {
  const std::string l = text::to_lower(text::trim(label));
  if (l == "full") return Agreement::kFull;
  if (l == "partial") return Agreement::kPartial;
  if (l == "low") return Agreement::kLow;
  return std::nullopt;
}

std::string record_violation(const MicRecord& r) {
  if (text::trim(r.id).empty()) return "empty id";
  if (text::trim(r.prompt).empty()) return "empty prompt";
  if (text::trim(r.reply).empty()) return "empty reply";
  if (text::trim(r.rot).empty()) return "empty rot";
  if (r.gold_foundations.empty()) return "empty foundation set";
  return {};
}

ColumnSchema ColumnSchema::from_json_text(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "schema must be a JSON object");
  ColumnSchema s;
  auto take = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::string>();
  };
  try {
    take("id", s.id);
    take("prompt", s.prompt);
    take("reply", s.reply);
    take("rot", s.rot);
    take("foundations", s.foundations);
    take("judgment", s.judgment);
    if (j.contains("agreement")) {
      if (j["agreement"].is_null()) {
        s.agreement.reset();
      } else {
        s.agreement = j["agreement"].get<std::string>();
      }
    }
    if (j.contains("split") && !j["split"].is_null()) s.split = j["split"].get<std::string>();
    if (j.contains("delimiter")) {
      const auto d = j["delimiter"].get<std::string>();
      if (d == "\\t" || d == "tab") {
        s.delimiter = '\t';
      } else if (d.size() == 1) {
        s.delimiter = d[0];
      } else {
        throw Error(ErrorCode::kInvalidConfig, "delimiter must be a single character");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad schema field: ") + e.what());
  }
  return s;
}

ColumnSchema ColumnSchema::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

std::string ColumnSchema::to_json_text() const {
  nlohmann::ordered_json j{{"id", id},
                           {"prompt", prompt},
                           {"reply", reply},
                           {"rot", rot},
                           {"foundations", foundations},
                           {"judgment", judgment}};
  j["agreement"] = agreement ? nlohmann::ordered_json(*agreement) : nlohmann::ordered_json();
  if (split) j["split"] = *split;
  if (delimiter) j["delimiter"] = *delimiter == '\t' ? std::string("tab") : std::string(1, *delimiter);
  return j.dump(2) + "\n";
}

IngestResult ingest_text(std::string_view content, const ColumnSchema& schema, char delimiter) {
  const auto rows = read_delimited(content, delimiter);
  if (rows.empty()) throw Error(ErrorCode::kMissingColumn, "file has no header row");
  const Row& header = rows.front();
  const std::size_t c_id = column_index(header, schema.id);
  const std::size_t c_prompt = column_index(header, schema.prompt);
  const std::size_t c_reply = column_index(header, schema.reply);
  const std::size_t c_rot = column_index(header, schema.rot);
  const std::size_t c_found = column_index(header, schema.foundations);
  const std::size_t c_judg = column_index(header, schema.judgment);
  std::optional<std::size_t> c_agree;
  if (schema.agreement) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == *schema.agreement) c_agree = i;
    }
  }
  std::optional<std::size_t> c_split;
  if (schema.split) c_split = column_index(header, *schema.split);

  IngestResult result;
  result.agreement_defaulted = !c_agree.has_value();
  if (result.agreement_defaulted) {
    spdlog::warn("dataset has no agreement column; every row is treated as full agreement");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    auto reject = [&](const std::string& why) {
      result.rejects.push_back({r, "MalformedRow: " + why});
    };
    if (row.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, found " +
             std::to_string(row.size()));
      continue;
    }
    MicRecord rec;
    rec.id = std::string(text::trim(row[c_id]));
    rec.prompt = std::string(text::trim(row[c_prompt]));
    rec.reply = std::string(text::trim(row[c_reply]));
    rec.rot = std::string(text::trim(row[c_rot]));
    try {
      rec.gold_foundations = parse_foundations(row[c_found]);
    } catch (const Error&) {
      reject("no moral foundation in '" + row[c_found] + "'");
      continue;
    }
    const auto judgment = judgment_from_label(row[c_judg]);
    if (!judgment) {
      reject("unknown judgment '" + row[c_judg] + "'");
      continue;
    }
    rec.gold_judgment = *judgment;
    if (c_agree) {
      const auto agreement = agreement_from_label(row[*c_agree]);
      if (!agreement) {
        reject("unknown agreement '" + row[*c_agree] + "'");
        continue;
      }
      rec.agreement = *agreement;
    }
    if (c_split) rec.split = text::to_lower(text::trim(row[*c_split]));
    if (auto why = record_violation(rec); !why.empty()) {
      reject(why);
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const ColumnSchema& schema) {
  const std::string content = read_file(path);
  char delim = ',';
  if (schema.delimiter) {
    delim = *schema.delimiter;
  } else if (path.extension() == ".tsv") {
    delim = '\t';
  }
  return ingest_text(content, schema, delim);
}

std::string rejects_to_jsonl(std::span<const RejectEntry> rejects) {
  std::string out;
  for (const auto& r : rejects) {
    nlohmann::ordered_json j{{"row", r.row}, {"reason", r.reason}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<MicRecord> filter_full_agreement(std::span<const MicRecord> records) {
  std::vector<MicRecord> out;
  for (const auto& r : records) {
    if (r.agreement == Agreement::kFull) out.push_back(r);
  }
  return out;
}

std::vector<MicRecord> filter_split(std::span<const MicRecord> records, std::string_view split) {
  std::vector<MicRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> sampling_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 engine(seed);
  for (std::size_t i = count; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(engine, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<MicRecord> sample_subset(std::span<const MicRecord> records, std::size_t n,
                                     std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample size must be at least 1");
  if (n >= records.size()) return {records.begin(), records.end()};
  const auto order = sampling_order(records.size(), seed);
  std::vector<MicRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(records[order[i]]);
  return out;
}

std::vector<MicRecord> sampling_queue(std::span<const MicRecord> records, std::size_t n,
                                      std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample size must be at least 1");
  if (n >= records.size()) return {records.begin(), records.end()};
  std::vector<MicRecord> out;
  out.reserve(records.size());
  for (std::size_t i : sampling_order(records.size(), seed)) out.push_back(records[i]);
  return out;
}

double DatasetStats::inclusion_proportion(Foundation f) const {
  if (total == 0) return 0.0;
  return static_cast<double>(inclusion_counts[static_cast<std::size_t>(f)]) /
         static_cast<double>(total);
}

double DatasetStats::single_proportion(Foundation f) const {
  if (total == 0) return 0.0;
  return static_cast<double>(single_counts[static_cast<std::size_t>(f)]) /
         static_cast<double>(total);
}

DatasetStats compute_stats(std::span<const MicRecord> records) {
  DatasetStats s;
  s.total = records.size();
  for (const auto& r : records) {
    const std::size_t k = r.gold_foundations.size();
    if (k <= kNumFoundations) ++s.cardinality_histogram[k];
    for (Foundation f : r.gold_foundations) {
      ++s.inclusion_counts[static_cast<std::size_t>(f)];
      if (k == 1) ++s.single_counts[static_cast<std::size_t>(f)];
    }
  }
  return s;
}

std::string DatasetStats::to_json_text() const {
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (std::size_t k = 1; k <= kNumFoundations; ++k) hist[std::to_string(k)] = cardinality_histogram[k];
  nlohmann::ordered_json single = nlohmann::ordered_json::object();
  nlohmann::ordered_json incl = nlohmann::ordered_json::object();
  nlohmann::ordered_json prop = nlohmann::ordered_json::object();
  for (Foundation f : canonical_foundations()) {
    const std::string name(foundation_name(f));
    single[name] = single_counts[static_cast<std::size_t>(f)];
    incl[name] = inclusion_counts[static_cast<std::size_t>(f)];
    prop[name] = inclusion_proportion(f);
  }
  nlohmann::ordered_json j{{"total", total},
                           {"cardinality_histogram", hist},
                           {"single_counts", single},
                           {"inclusion_counts", incl},
                           {"inclusion_proportions", prop}};
  return j.dump(2);
}

DatasetStats DatasetStats::from_json_text(std::string_view json_text) {
  DatasetStats s;
  try {
    const auto j = nlohmann::json::parse(json_text);
    s.total = j.at("total").get<std::size_t>();
    for (std::size_t k = 1; k <= kNumFoundations; ++k) {
      s.cardinality_histogram[k] = j.at("cardinality_histogram").at(std::to_string(k)).get<std::size_t>();
    }
    for (Foundation f : canonical_foundations()) {
      const std::string name(foundation_name(f));
      s.single_counts[static_cast<std::size_t>(f)] = j.at("single_counts").at(name).get<std::size_t>();
      s.inclusion_counts[static_cast<std::size_t>(f)] =
          j.at("inclusion_counts").at(name).get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad stats document: ") + e.what());
  }
  return s;
}

std::string records_to_jsonl(std::span<const MicRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json found = nlohmann::ordered_json::array();
    for (Foundation f : r.gold_foundations) found.push_back(foundation_name(f));
    nlohmann::ordered_json j{{"id", r.id},
                             {"prompt", r.prompt},
                             {"reply", r.reply},
                             {"rot", r.rot},
                             {"foundations", found},
                             {"judgment", judgment_name(r.gold_judgment)},
                             {"agreement", agreement_name(r.agreement)},
                             {"split", r.split}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<MicRecord> records_from_jsonl(std::string_view content) {
  std::vector<MicRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = text::trim(content.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MicRecord r;
      r.id = j.at("id").get<std::string>();
      r.prompt = j.at("prompt").get<std::string>();
      r.reply = j.at("reply").get<std::string>();
      r.rot = j.at("rot").get<std::string>();
      for (const auto& f : j.at("foundations")) {
        const auto parsed = foundation_from_name(f.get<std::string>());
        if (!parsed) throw Error(ErrorCode::kUnknownLabel, "unknown foundation");
        r.gold_foundations.insert(*parsed);
      }
      const auto jd = judgment_from_label(j.at("judgment").get<std::string>());
      const auto ag = agreement_from_label(j.at("agreement").get<std::string>());
      if (!jd || !ag) throw Error(ErrorCode::kUnknownLabel, "unknown label");
      r.gold_judgment = *jd;
      r.agreement = *ag;
      r.split = j.value("split", std::string("train"));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedRow,
                  "record store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace moralchain
