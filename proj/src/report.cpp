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

// Report documents, seed aggregation and table rendering.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "moralchain/error.hpp"
#include "moralchain/evalkit.hpp"

namespace moralchain {
namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(); }

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  // "—" is three bytes but one column.
  std::size_t cols = 0;
  for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
  if (cols >= width) return s;
  const std::string fill(width - cols, ' ');
  return left ? s + fill : fill + s;
}

struct RowKey {
  std::string model;
  std::size_t size;
  auto operator<=>(const RowKey&) const = default;
};

std::optional<double> stratum_value(const EvalReport& r, std::size_t stratum) {
  if (!r.mfc) return std::nullopt;
  if (stratum == 0) return r.mfc->average;
  return r.mfc->strata[stratum].accuracy();
}

constexpr Setting kOrder[] = {Setting::kBase, Setting::kBasePlus, Setting::kOurs};

std::string render_mfc_table(std::span<const EvalReport> reports, std::string& csv) {
  std::map<RowKey, std::map<Setting, const EvalReport*>> rows;
  for (const auto& r : reports) {
    if (r.cell.task == TaskKind::kMfc) rows[{r.cell.model, r.cell.size}][r.cell.setting] = &r;
  }
  std::ostringstream out;
  out << "MFC accuracy by number of gold foundations\n";
  out << pad("Model", 16, true) << pad("Size", 7);
  const char* groups[] = {"#MFs=1", "#MFs=2", "#MFs=3", "Average"};
  for (const char* g : groups) out << " | " << pad(g, 20, true);
  out << "\n" << pad("", 16, true) << pad("", 7);
  for (std::size_t g = 0; g < 4; ++g) {
    out << " |";
    for (Setting s : kOrder) out << pad(std::string(setting_label(s)), 7);
  }
  out << "\n";
  csv = "model,size";
  const char* csv_groups[] = {"mfs1", "mfs2", "mfs3", "average"};
  for (const char* g : csv_groups) {
    for (Setting s : kOrder) csv += std::string(",") + g + "_" + std::string(setting_name(s));
  }
  csv += "\n";
  for (const auto& [key, cells] : rows) {
    out << pad(key.model, 16, true) << pad(std::to_string(key.size), 7);
    csv += key.model + "," + std::to_string(key.size);
    for (std::size_t stratum : {1u, 2u, 3u, 0u}) {
      out << " |";
      for (Setting s : kOrder) {
        std::optional<double> v;
        if (auto it = cells.find(s); it != cells.end()) v = stratum_value(*it->second, stratum);
        out << pad(format_score(v), 7);
        csv += "," + (v ? format_score(*v) : std::string());
      }
    }
    out << "\n";
    csv += "\n";
  }
  return out.str();
}

std::string render_judgment_table(std::span<const EvalReport> reports, std::string& csv) {
  std::map<RowKey, std::map<Setting, std::optional<double>>> rows;
  for (const auto& r : reports) {
    if (r.cell.task == TaskKind::kJudgment) rows[{r.cell.model, r.cell.size}][r.cell.setting] = r.judgment_accuracy;
  }
  std::ostringstream out;
  out << "Moral judgment accuracy\n" << pad("Model", 16, true) << pad("Size", 7);
  for (Setting s : kOrder) out << pad(std::string(setting_label(s)), 7);
  out << "\n";
  csv = "model,size,base,base_plus,ours\n";
  for (const auto& [key, cells] : rows) {
    out << pad(key.model, 16, true) << pad(std::to_string(key.size), 7);
    csv += key.model + "," + std::to_string(key.size);
    for (Setting s : kOrder) {
      std::optional<double> v;
      if (auto it = cells.find(s); it != cells.end()) v = it->second;
      out << pad(format_score(v), 7);
      csv += "," + (v ? format_score(*v) : std::string());
    }
    out << "\n";
    csv += "\n";
  }
  return out.str();
}

std::string render_joint_table(std::span<const EvalReport> reports, std::string& csv) {
  std::map<RowKey, std::pair<std::optional<double>, std::optional<double>>> rows;
  for (const auto& r : reports) {
    if (r.cell.setting != Setting::kOurs) continue;
    if (r.cell.task == TaskKind::kJudgment) rows[{r.cell.model, r.cell.size}].first = r.judgment_accuracy;
    if (r.cell.task == TaskKind::kJoint) rows[{r.cell.model, r.cell.size}].second = r.judgment_accuracy;
  }
  std::ostringstream out;
  out << "Judgment accuracy: judgment task vs joint task\n"
      << pad("Model", 16, true) << pad("Size", 7) << pad("Judgment", 10) << pad("MFC-Judgment", 14) << "\n";
  csv = "model,size,judgment,joint\n";
  for (const auto& [key, v] : rows) {
    out << pad(key.model, 16, true) << pad(std::to_string(key.size), 7) << pad(format_score(v.first), 10)
        << pad(format_score(v.second), 14) << "\n";
    csv += key.model + "," + std::to_string(key.size) + "," + (v.first ? format_score(*v.first) : "") + "," +
           (v.second ? format_score(*v.second) : "") + "\n";
  }
  return out.str();
}

std::string signed_score(double v) { return (v < 0 ? "-" : "+") + format_score(std::fabs(v)); }

}  // namespace

std::string format_score(double value) {
  const double rounded = std::floor(value * 1000.0 + 0.5 + 1e-9);
  const auto thousandths = static_cast<long long>(rounded);
  const bool negative = thousandths < 0;
  const long long mag = negative ? -thousandths : thousandths;
  char buf[32];
  if (mag >= 1000) {
    std::snprintf(buf, sizeof(buf), "%s%lld.%03lld", negative ? "-" : "", mag / 1000, mag % 1000);
  } else {
    std::snprintf(buf, sizeof(buf), "%s.%03lld", negative ? "-" : "", mag);
  }
  return buf;
}

std::string format_score(const std::optional<double>& value) {
  return value ? format_score(*value) : std::string("—");
}

std::optional<double> EvalReport::headline() const {
  if (cell.task == TaskKind::kMfc) return mfc ? mfc->average : std::nullopt;
  return judgment_accuracy;
}

std::string EvalReport::to_json_text() const {
  ojson j{{"task", task_name(cell.task)},
          {"setting", setting_name(cell.setting)},
          {"size", cell.size},
          {"model", cell.model},
          {"seed", seed},
          {"items", items},
          {"unparsable", unparsable}};
  if (mfc) {
    ojson strata = ojson::object();
    for (std::size_t k = 1; k <= kNumFoundations; ++k) {
      strata[std::to_string(k)] = {{"items", mfc->strata[k].items}, {"credit", mfc->strata[k].credit},
                                   {"accuracy", optional_number(mfc->strata[k].accuracy())}};
    }
    j["mfc"] = {{"strata", strata}, {"average", optional_number(mfc->average)}};
  } else {
    j["mfc"] = nullptr;
  }
  j["judgment_accuracy"] = optional_number(judgment_accuracy);
  ojson rows = ojson::array();
  for (const auto& r : foundation_rows) {
    rows.push_back({{"foundation", foundation_name(r.foundation)},
                    {"proportion", r.proportion},
                    {"items", r.items},
                    {"correct", r.correct},
                    {"accuracy", optional_number(r.accuracy)},
                    {"empty_stratum", r.empty_stratum}});
  }
  j["foundation_rows"] = rows;
  j["perplexity"] = optional_number(perplexity);
  j["seeds"] = seeds;
  j["aggregation"] = aggregation;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json_text(std::string_view json_text) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const auto task = task_from_name(j.at("task").get<std::string>());
    const auto setting = setting_from_name(j.at("setting").get<std::string>());
    if (!task || !setting) throw Error(ErrorCode::kInvalidArgument, "unknown task or setting in report");
    r.cell = {*task, *setting, j.at("size").get<std::size_t>(), j.at("model").get<std::string>()};
    r.seed = j.at("seed").get<std::uint64_t>();
    r.items = j.value("items", std::size_t{0});
    r.unparsable = j.value("unparsable", std::size_t{0});
    if (j.contains("mfc") && !j["mfc"].is_null()) {
      MfcAccuracy m;
      for (std::size_t k = 1; k <= kNumFoundations; ++k) {
        const auto& s = j["mfc"]["strata"].at(std::to_string(k));
        m.strata[k].items = s.at("items").get<std::size_t>();
        m.strata[k].credit = s.at("credit").get<double>();
      }
      m.average = read_optional(j["mfc"], "average");
      r.mfc = m;
    }
    r.judgment_accuracy = read_optional(j, "judgment_accuracy");
    for (const auto& row : j.value("foundation_rows", nlohmann::json::array())) {
      FoundationRow fr;
      const auto f = foundation_from_name(row.at("foundation").get<std::string>());
      if (!f) throw Error(ErrorCode::kInvalidArgument, "unknown foundation in report");
      fr.foundation = *f;
      fr.proportion = row.at("proportion").get<double>();
      fr.items = row.at("items").get<std::size_t>();
      fr.correct = row.at("correct").get<std::size_t>();
      fr.accuracy = read_optional(row, "accuracy");
      fr.empty_stratum = row.at("empty_stratum").get<bool>();
      r.foundation_rows.push_back(fr);
    }
    r.perplexity = read_optional(j, "perplexity");
    r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    r.aggregation = j.value("aggregation", std::string("single"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad report document: ") + e.what());
  }
  return r;
}

EvalReport best_of_seeds(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kInvalidArgument, "no reports to aggregate");
  const EvalReport* best = &reports.front();
  std::vector<std::uint64_t> seeds;
  for (const auto& r : reports) {
    if (!(r.cell == reports.front().cell)) {
      throw Error(ErrorCode::kHeterogeneousCell, "reports span different grid cells");
    }
    seeds.push_back(r.seed);
    const double score = r.headline().value_or(-std::numeric_limits<double>::infinity());
    const double best_score = best->headline().value_or(-std::numeric_limits<double>::infinity());
    if (score > best_score || (score == best_score && r.seed < best->seed)) best = &r;
  }
  EvalReport out = *best;
  std::sort(seeds.begin(), seeds.end());
  out.seeds = seeds;
  out.aggregation = reports.size() == 1 ? out.aggregation : "best-of-seeds";
  return out;
}

std::string InterventionSummary::to_json_text() const {
  ojson j{{"model", model},
          {"size", size},
          {"seed", seed},
          {"items", items},
          {"skipped", skipped},
          {"changed", changed},
          {"original_accuracy", original_accuracy},
          {"intervened_accuracy", intervened_accuracy},
          {"delta", delta()}};
  return j.dump(2) + "\n";
}

InterventionSummary InterventionSummary::from_json_text(std::string_view json_text) {
  InterventionSummary s;
  try {
    const auto j = nlohmann::json::parse(json_text);
    s.model = j.at("model").get<std::string>();
    s.size = j.at("size").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.items = j.at("items").get<std::size_t>();
    s.skipped = j.at("skipped").get<std::size_t>();
    s.changed = j.at("changed").get<std::size_t>();
    s.original_accuracy = j.at("original_accuracy").get<double>();
    s.intervened_accuracy = j.at("intervened_accuracy").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad intervention summary: ") + e.what());
  }
  return s;
}

RenderedReport render_report(std::span<const EvalReport> reports,
                             std::span<const InterventionSummary> interventions, ReportLayout layout) {
  RenderedReport out;
  const bool all = layout == ReportLayout::kAll;
  std::string csv;
  if (all || layout == ReportLayout::kMfcTable) {
    out.text += render_mfc_table(reports, csv) + "\n";
    out.csv_files.emplace_back("table_mfc.csv", csv);
  }
  if (all || layout == ReportLayout::kJudgmentTable) {
    out.text += render_judgment_table(reports, csv) + "\n";
    out.csv_files.emplace_back("table_judgment.csv", csv);
  }
  if (all || layout == ReportLayout::kJointTable) {
    out.text += render_joint_table(reports, csv) + "\n";
    out.csv_files.emplace_back("table_joint.csv", csv);
  }
  if (!all) return out;

  std::string fig1 = "model,size,seed,items,skipped,changed,original_accuracy,intervened_accuracy,delta\n";
  for (const auto& s : interventions) {
    fig1 += s.model + "," + std::to_string(s.size) + "," + std::to_string(s.seed) + "," +
            std::to_string(s.items) + "," + std::to_string(s.skipped) + "," + std::to_string(s.changed) + "," +
            format_score(s.original_accuracy) + "," + format_score(s.intervened_accuracy) + "," +
            signed_score(s.delta()) + "\n";
  }
  out.csv_files.emplace_back("fig_intervention.csv", fig1);

  std::string fig2 = "model,task,size,setting,seed,perplexity\n";
  for (const auto& r : reports) {
    if (!r.perplexity) continue;
    char ppl[64];
    std::snprintf(ppl, sizeof(ppl), "%.3f", *r.perplexity);
    fig2 += r.cell.model + "," + std::string(task_name(r.cell.task)) + "," + std::to_string(r.cell.size) + "," +
            std::string(setting_name(r.cell.setting)) + "," + std::to_string(r.seed) + "," + ppl + "\n";
  }
  out.csv_files.emplace_back("fig_perplexity.csv", fig2);

  std::string fig3 = "model,size,setting,foundation,proportion,items,accuracy\n";
  for (const auto& r : reports) {
    if (r.cell.task != TaskKind::kJoint) continue;
    for (const auto& row : r.foundation_rows) {
      fig3 += r.cell.model + "," + std::to_string(r.cell.size) + "," + std::string(setting_name(r.cell.setting)) +
              "," + std::string(foundation_name(row.foundation)) + "," + format_score(row.proportion) + "," +
              std::to_string(row.items) + "," + (row.accuracy ? format_score(*row.accuracy) : "") + "\n";
    }
  }
  out.csv_files.emplace_back("fig_foundation_wise.csv", fig3);

  if (!interventions.empty()) {
    std::ostringstream text;
    text << "Intervention (joint task, ground-truth foundations spliced into step 2)\n"
         << pad("Model", 16, true) << pad("Size", 7) << pad("Seed", 6) << pad("Items", 7) << pad("Orig", 8)
         << pad("Interv", 8) << pad("Delta", 8) << "\n";
    for (const auto& s : interventions) {
      text << pad(s.model, 16, true) << pad(std::to_string(s.size), 7) << pad(std::to_string(s.seed), 6)
           << pad(std::to_string(s.items), 7) << pad(format_score(s.original_accuracy), 8)
           << pad(format_score(s.intervened_accuracy), 8) << pad(signed_score(s.delta()), 8) << "\n";
    }
    out.text += text.str() + "\n";
  }
  return out;
}

}  // namespace moralchain
