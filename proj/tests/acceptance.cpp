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

// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   acceptance [--criterion N] [--work-dir DIR]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus_mutations.hpp"
#include "metric_fixtures.hpp"
#include "moralchain/corpus.hpp"
#include "moralchain/error.hpp"
#include "moralchain/evalkit.hpp"
#include "moralchain/intervene.hpp"
#include "moralchain/io.hpp"
#include "moralchain/prompts.hpp"
#include "moralchain/stub_models.hpp"
#include "moralchain/synthetic.hpp"
#include "moralchain/teacher.hpp"
#include "splice_oracle.hpp"

namespace fs = std::filesystem;
using namespace moralchain;
using F = Foundation;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (problems.size() < 20) problems.push_back(what);
  }
};

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome(const fs::path&)> run;
};

std::string fmt(double v, int digits = 5) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

ClientOptions quick_client() {
  ClientOptions o;
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  o.max_in_flight = 4;
  return o;
}

// ---- 1 ----

Outcome mfc_average_consistency(const fs::path&) {
  Outcome out;
  const std::string csv = read_file(std::string(MORALCHAIN_FIXTURE_DIR) + "/mfc_published_accuracy.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) {
      out.require(false, "bad fixture row: " + line);
      continue;
    }
    ++rows;
    const std::vector<std::optional<double>> strata{std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
    const double published = std::stod(f[6]);
    const double computed = *stratum_average(strata);
    out.require(std::fabs(computed - published) <= 0.0005 + 1e-12,
                f[0] + "/" + f[1] + "/" + f[2] + ": mean " + fmt(computed) + " vs published " + f[6] +
                    " (|diff| " + fmt(std::fabs(computed - published)) + " > 0.0005)");
  }
  out.require(rows >= 12, "expected at least 12 fixture rows, found " + std::to_string(rows));
  return out;
}

// ---- 2 ----

Outcome template_byte_exactness(const fs::path&) {
  Outcome out;
  MicRecord r;
  r.id = "fixture";
  r.prompt = "Why don't we just print a bunch of money to pay off our massive world debt?";
  r.reply = "Because the value of that money then becomes less and less.";
  r.rot = "Don't think that printing money can fix all of your problems.";
  r.gold_foundations = {F::kCare, F::kFairness, F::kSanctity};
  r.gold_judgment = Judgment::kDisagree;

  const std::string defs =
      "There are six moral foundations. Care: wanting someone or something to be safe, healthy, happy. Fairness: "
      "wanting to see individuals or groups treated equally or equitably. Liberty: wanting people to be free to "
      "make their own decisions. Loyalty: wanting unity and seeing people keep promises or obligations to an "
      "in-group. Authority: wanting to respect social roles, duties, privacy, peace, and order. Sanctity: wanting "
      "people and things to be clean, pure, innocent, and holy.";
  const std::string rot_sentence = "The rule-of-thumb judgment is Don't think that printing money can fix all of your problems.";
  const std::string label = "The moral foundations underlying the rule-of-thumb are care, fairness, and sanctity.";
  const InferenceChain chain = make_chain("A.", "B.", "C.");

  const std::map<Setting, std::string> expected{
      {Setting::kBase, rot_sentence + " " + label},
      {Setting::kBasePlus, defs + " " + rot_sentence + " " + label},
      {Setting::kOurs, defs + " " + rot_sentence +
                           " ###Inference: (1) A. (2) B. (3) C. the moral foundations underlying the rule-of-thumb "
                           "are care, fairness, and sanctity."}};
  for (const auto& [setting, want] : expected) {
    const std::optional<InferenceChain> c = setting == Setting::kOurs ? std::optional(chain) : std::nullopt;
    const std::string got = build_sft_record(r, TaskKind::kMfc, setting, c).text();
    out.require(got == want, "mfc/" + std::string(setting_name(setting)) + " record differs:\n  got  " + got +
                                 "\n  want " + want);
  }

  const std::string list = "care, fairness, and sanctity";
  struct TeacherCheck {
    TaskKind task;
    std::vector<std::string> slots;
  };
  const std::string defs_block = defs.substr(std::string("There are six moral foundations. ").size());
  const TeacherCheck checks[] = {
      {TaskKind::kMfc, {r.rot, defs_block, "relevant to the MFs " + list}},
      {TaskKind::kJudgment,
       {r.prompt, r.reply, "underlying this Prompt-Reply are " + list, "definition of moral foundations " + list,
        "The moral judgment of the Reply is Disagree.", "upholds or violates " + list}},
      {TaskKind::kJoint,
       {defs_block, r.prompt, r.reply, "associated to the moral foundations " + list,
        "The moral judgment of the Reply is Disagree.", "the moral foundations of the " + list}}};
  for (const auto& check : checks) {
    const std::string prompt = build_teacher_prompt(r, check.task);
    const std::string task(task_name(check.task));
    for (const auto& slot : check.slots) {
      out.require(prompt.find(slot) != std::string::npos, task + " teacher prompt lacks \"" + slot + "\"");
    }
    const auto p1 = prompt.find("(1)");
    const auto p2 = prompt.find("(2)");
    const auto p3 = prompt.find("(3)");
    out.require(p1 != std::string::npos && p1 < p2 && p2 < p3 && p3 != std::string::npos,
                task + " teacher prompt lacks ordered (1) (2) (3)");
    out.require(prompt.find('{') == std::string::npos && prompt.find('}') == std::string::npos,
                task + " teacher prompt has an unfilled slot");
    out.require(prompt.starts_with("Input: ") && prompt.find("\n\nInference: (1)") != std::string::npos,
                task + " teacher prompt lacks the Input/Inference layout");
  }
  return out;
}

// ---- 3 ----

Outcome parser_oracle(const fs::path&) {
  Outcome out;
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 1000; ++i) {
    const auto set = FoundationSet::from_bits(static_cast<std::uint8_t>(rng() % 63 + 1));
    const std::string text = format_foundation_list(set);
    try {
      out.require(parse_foundations(text) == set, "parse(format(S)) != S for \"" + text + "\"");
    } catch (const Error& e) {
      out.require(false, "parse threw on \"" + text + "\": " + e.what());
    }
  }

  const std::vector<std::string> vocab{
      "care", "Fairness", "liberty", "LOYALTY", "authority", "sanctity", "and", ",", ".", " ", "\n", "(1)", "(2)",
      "(3)", "(a)", "###Inference:", "The moral foundations underlying the rule-of-thumb are",
      "underlying this Prompt-Reply are", "The moral judgment of the reply is", "agree", "Neutral", "disagree",
      "carefully", "unfair", "\xC3\xA9", "\xFF", "{", "}", "\"", "\\", "\t"};
  std::size_t crashes = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string raw;
    const std::size_t n = rng() % 40;
    for (std::size_t k = 0; k < n; ++k) {
      if (rng() % 10 == 0) {
        raw += static_cast<char>(rng() % 256);
      } else {
        raw += vocab[rng() % vocab.size()];
        if (rng() % 2) raw += ' ';
      }
    }
    for (TaskKind task : kAllTasks) {
      try {
        const Prediction p = parse_prediction("f" + std::to_string(i), raw, task);
        if (p.foundations) {
          const auto names = p.foundations->to_vector();
          const std::set<Foundation> unique(names.begin(), names.end());
          out.require(unique.size() == names.size() && !names.empty(), "duplicate or empty foundations parsed");
          out.require(parse_foundations(format_foundation_list(*p.foundations)) == *p.foundations,
                      "parsed set does not round trip");
        }
      } catch (...) {
        ++crashes;
      }
    }
  }
  out.require(crashes == 0, std::to_string(crashes) + " fuzz inputs made parse_prediction throw");
  return out;
}

// ---- 4 ----

Outcome metric_oracle(const fs::path&) {
  Outcome out;
  const auto list = fixtures::metric_fixtures();
  out.require(list.size() == 25, "expected 25 metric fixtures, have " + std::to_string(list.size()));
  for (const auto& f : list) {
    std::string msg;
    try {
      msg = f.check();
    } catch (const std::exception& e) {
      msg = std::string("threw: ") + e.what();
    }
    out.require(msg.empty(), f.name + ": " + msg);
  }
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<MicRecord> golds;
  std::vector<Prediction> preds;
  for (int i = 0; i < 10000; ++i) {
    const std::string id = "u" + std::to_string(i);
    golds.push_back(fixtures::gold(id, {F::kCare}, static_cast<Judgment>(pick(rng))));
    preds.push_back(fixtures::pred(id, std::nullopt, static_cast<Judgment>(pick(rng))));
  }
  const double acc = judgment_accuracy(preds, golds);
  out.require(std::fabs(acc - 1.0 / 3.0) <= 0.02, "uniform stub accuracy " + fmt(acc) + " not within 0.02 of 1/3");
  return out;
}

// ---- 5 ----

Outcome perplexity_analytics(const fs::path&) {
  Outcome out;
  auto rel = [](double got, double want) { return std::fabs(got - want) / want; };
  for (double p : {0.25, 0.5, 0.1, 1.0 / 3.0, 1e-4, 1.0 / 50257.0, 1.0}) {
    for (std::size_t n : {1u, 2u, 7u, 512u, 10000u}) {
      const std::vector<double> stream(n, std::log(p));
      const double got = perplexity(stream);
      out.require(rel(got, 1.0 / p) <= 1e-9, "p=" + fmt(p, 8) + " n=" + std::to_string(n) + ": " + fmt(got, 12));
      PerplexityAccumulator acc;
      for (std::size_t begin = 0; begin < n; begin += 64) {
        const std::size_t end = std::min(n, begin + 64);
        acc.add(std::span(stream).subspan(begin, end - begin));
      }
      out.require(acc.tokens() == n && rel(acc.value(), 1.0 / p) <= 1e-9,
                  "windowed accumulation differs for p=" + fmt(p, 8) + " n=" + std::to_string(n));
    }
  }
  const std::vector<double> quarter(1000, std::log(0.25));
  out.require(rel(perplexity(quarter), 4.0) <= 1e-9, "ln(1/4) stream is not 4.0");
  return out;
}

// ---- 6 ----

Outcome intervention_harness(const fs::path&) {
  Outcome out;
  std::size_t unchanged_cases = 0;
  for (const auto& c : fixtures::splice_cases(100, 6)) {
    std::string got;
    try {
      got = splice_ground_truth(c.step2, c.gold);
    } catch (const Error& e) {
      out.require(false, std::string("splice threw: ") + e.what());
      continue;
    }
    const std::string want = fixtures::oracle_splice(c.step2, c.gold);
    out.require(got == want, "splice differs from oracle:\n  in   " + c.step2 + "\n  got  " + got + "\n  want " + want);
    // Bytes before the first and after the last name are never touched.
    const auto runs = find_foundation_runs(c.step2);
    if (!runs.empty()) {
      out.require(got.compare(0, runs.front().begin, c.step2, 0, runs.front().begin) == 0, "prefix changed");
      const std::size_t tail = c.step2.size() - runs.back().end;
      out.require(got.size() >= tail && got.compare(got.size() - tail, tail, c.step2, runs.back().end, tail) == 0,
                  "suffix changed");
    }
    unchanged_cases += got == c.step2 ? 1 : 0;
  }
  out.require(unchanged_cases > 0, "no no-op splice cases were exercised");

  const auto all = synthetic_dataset();
  const auto records = filter_full_agreement(all);
  CompletionClient client(std::make_shared<StubModelBackend>(all), nullptr, quick_client());
  InterventionOptions options;
  options.endpoint_id = "stub-1B-joint-ours-5000-s1";
  const auto run = run_interventions(client, records, options, 4);
  std::size_t unchanged = 0;
  for (const auto& o : run.outcomes) {
    if (o.changed) continue;
    ++unchanged;
    out.require(o.original_prompt == o.spliced_prompt, o.id + ": unchanged item has a different prompt");
  }
  out.require(unchanged > 0, "no changed=false items in the harness run");
  out.require(run.outcomes.size() + run.skipped.size() == records.size(), "outcomes + skipped != items");
  const auto summary = summarize_interventions(run, records);
  out.require(summary.delta() > 0.0, "intervention delta " + fmt(summary.delta()) + " is not positive (original " +
                                         fmt(summary.original_accuracy) + ", intervened " +
                                         fmt(summary.intervened_accuracy) + ")");
  return out;
}

// ---- 7 ----

std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out[fs::relative(entry.path(), root).generic_string()] = sha256_file(entry.path());
  }
  return out;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + MORALCHAIN_CLI + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome end_to_end_dry_run(const fs::path& work) {
  Outcome out;
  const fs::path ws = work / "dry_run";
  fs::remove_all(ws);
  fs::create_directories(ws);
  const fs::path log = ws / "cli.log";
  out.require(run_cli("synth --records 50 --out \"" + (ws / "w").string() + "\"", log) == 0, "synth failed");
  const std::string config = " --stub-endpoint --config \"" + (ws / "w" / "config.json").string() + "\"";

  std::vector<std::map<std::string, std::string>> digests;
  for (int pass = 0; pass < 2 && out.pass; ++pass) {
    fs::remove_all(ws / "w" / "out");
    fs::remove_all(ws / "w" / "cache");
    for (std::string_view command : {"ingest", "gen-chains", "emit-corpus", "eval", "intervene", "ppl", "report"}) {
      const int status = run_cli(std::string(command) + config, log);
      out.require(status == 0, "pass " + std::to_string(pass + 1) + ": " + std::string(command) + " exited " +
                                   std::to_string(status) + " (see " + log.string() + ")");
    }
    if (!out.pass) break;
    digests.push_back(tree_digest(ws / "w" / "out"));
  }
  if (!out.pass) return out;

  const auto& d = digests[0];
  for (const char* task : {"mfc", "judgment", "joint"}) {
    for (const char* setting : {"base", "base_plus", "ours"}) {
      const std::string slug = std::string(task) + "_" + setting + "_20_s1";
      out.require(d.contains("corpora/" + slug + ".jsonl"), "missing corpus " + slug);
      out.require(d.contains("eval/" + slug + ".report.json"), "missing report " + slug);
    }
  }
  out.require(d.contains("intervene/joint_ours_20_s1.summary.json"), "missing intervention summary");
  out.require(d.contains("report/report.txt"), "missing report/report.txt");
  out.require(d.contains("report/table_mfc.csv"), "missing report/table_mfc.csv");
  out.require(!d.empty(), "no artifacts");
  for (const auto& [name, sha] : d) {
    auto it = digests[1].find(name);
    out.require(it != digests[1].end(), name + " missing in second run");
    if (it != digests[1].end()) out.require(it->second == sha, name + " differs between runs");
  }
  out.require(digests[1].size() == d.size(), "second run wrote a different file set");
  return out;
}

// ---- 8 ----

Outcome corpus_determinism(const fs::path& work) {
  Outcome out;
  const fs::path dir = work / "corpus_determinism";
  fs::remove_all(dir);
  const auto records = filter_full_agreement(synthetic_dataset());

  CompletionClient teacher(std::make_shared<StubTeacherBackend>(), nullptr, quick_client());
  std::map<TaskKind, ChainMap> chains;
  for (TaskKind task : kAllTasks) {
    for (const auto& r : records) chains[task].emplace(r.id, generate_chain(teacher, r, task, {}));
  }

  std::size_t corpora = 0;
  for (TaskKind task : kAllTasks) {
    for (Setting setting : kAllSettings) {
      const CorpusCell cell{task, setting, records.size(), 1};
      const auto a = dir / "a" / (cell.slug() + ".jsonl");
      const auto b = dir / "b" / (cell.slug() + ".jsonl");
      const auto ma = emit_corpus(records, cell, chains[task], a);
      const auto mb = emit_corpus(records, cell, chains[task], b);
      out.require(ma.sha256 == mb.sha256 && ma.sha256 == sha256_file(b), cell.slug() + ": digest differs");
      out.require(read_file(a) == read_file(b), cell.slug() + ": bytes differ");
      const auto report = validate_corpus(a, task, setting);
      out.require(report.failures() == 0 && report.lines.size() == records.size(),
                  cell.slug() + ": validation failures\n" + report.to_jsonl());
      ++corpora;
    }
  }
  out.require(corpora == 9, "expected 9 corpora");

  const std::vector<std::size_t> injected{2, 5, 11};
  for (const auto& mutation : fixtures::corpus_mutations()) {
    const std::string clean = render_corpus(records, mutation.task, mutation.setting, chains[mutation.task]);
    const std::string bad = fixtures::mutate_lines(clean, mutation, injected);
    const auto report = validate_corpus_text(bad, mutation.task, mutation.setting);
    std::vector<std::size_t> flagged;
    for (const auto& line : report.lines) {
      if (line.ok()) continue;
      flagged.push_back(line.line);
      out.require(line.reasons == std::vector<std::string>{mutation.reason},
                  mutation.name + ": line " + std::to_string(line.line) + " has unexpected reasons");
    }
    out.require(flagged == injected, mutation.name + ": flagged lines differ from injected lines");
  }
  return out;
}

std::vector<Criterion> criteria() {
  return {{1, "mfc_average_consistency", 1, mfc_average_consistency},
          {2, "template_byte_exactness", 1, template_byte_exactness},
          {3, "parser_oracle", 0, parser_oracle},
          {4, "metric_oracle", 0, metric_oracle},
          {5, "perplexity_analytics", 0, perplexity_analytics},
          {6, "intervention_harness", 10, intervention_harness},
          {7, "end_to_end_dry_run", 60, end_to_end_dry_run},
          {8, "corpus_determinism", 0, corpus_determinism}};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  fs::path work = fs::temp_directory_path() / "moralchain-acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else if (arg == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N] [--work-dir DIR]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  bool all_pass = true;
  bool ran = false;
  for (const auto& c : criteria()) {
    if (only && *only != c.number) continue;
    ran = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(work);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0) {
      o.require(seconds < c.budget_seconds, "runtime " + fmt(seconds, 2) + " s exceeds " + fmt(c.budget_seconds, 0) + " s");
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.number << " " << c.name << "  (" << fmt(seconds, 3)
              << " s)\n";
    for (const auto& p : o.problems) std::cout << "      " << p << "\n";
    all_pass = all_pass && o.pass;
  }
  if (!ran) {
    std::cerr << "no criterion " << *only << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
