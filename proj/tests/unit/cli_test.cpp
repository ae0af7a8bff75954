// Copyright 2026 The specbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "specbridge/cli/commands.h"
#include "specbridge/cli/config.h"
#include "specbridge/cli/corpus.h"
#include "specbridge/cli/report.h"
#include "specbridge/cli/store.h"
#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"
#include "support.h"

using namespace specbridge;
using nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "specbridge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

StageResult sample_result() {
  StageResult r;
  r.program_id = "p1";
  Stage a;
  a.modality_used = Modality::Static;
  a.candidate = "fn main() { print!(\"\\u{1}\"); }";
  a.verdict = Verdict::Fail;
  a.failure_kind = FailureKind::Compile;
  a.temperature = 0.0;
  a.repair_calls = 2;
  a.note = "compile failed: x";
  Stage b = a;
  b.modality_used = Modality::None;
  b.verdict = Verdict::Pass;
  b.failure_kind = FailureKind::None;
  b.temperature = 0.3;
  r.stages = {a, b};
  return r;
}

StoredRun run_with(const std::string& id, const std::vector<std::vector<bool>>& verdicts) {
  StoredRun run;
  run.run_id = id;
  run.mode = "spectra";
  run.k_max = 3;
  run.created = "2026-01-01T00:00:00Z";
  int i = 0;
  for (const auto& v : verdicts) {
    StageResult r;
    r.program_id = "p" + std::to_string(i++);
    for (bool pass : v) {
      Stage s;
      s.verdict = pass ? Verdict::Pass : Verdict::Fail;
      r.stages.push_back(s);
    }
    run.results.push_back(r);
  }
  return run;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config layering: defaults < file < env < flags") {
    const auto d = resolve_config(nullptr, nullptr);
    CHECK(d.provider == "replay");
    CHECK(d.k == 3);
    CHECK(d.repair_rounds == 0);
    CHECK(d.project_repair_rounds == 3);
    CHECK(d.budget.io_max == 10);
    CHECK(d.temperatures.spec_gen == 0.6);
    CHECK(d.temperatures.later_translate == 0.3);

    const json file = {{"k", 5}, {"provider_url", "http://file"}, {"budget", {{"io", 4}}}};
    const json flags = {{"k", 2}};
    auto c = resolve_config(file, flags, {{"SPECTRA_PROVIDER_URL", "http://env"}});
    CHECK(c.k == 2);
    CHECK(c.provider_url == "http://env");
    CHECK(c.budget.io_max == 4);
    CHECK(c.budget.static_max == 6);
    c = resolve_config(file, nullptr, {});
    CHECK(c.provider_url == "http://file");

    CHECK_THROWS_AS(resolve_config(json{{"nope", 1}}, nullptr), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"k", "three"}}, nullptr), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"repair_rounds", 4}}, nullptr), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"budget", {{"batch", 9}}}}, nullptr), ConfigError);
    CHECK(AppConfig::from_json(d.to_json()).to_json() == d.to_json());

    const auto p = d.pipeline(true);
    CHECK(p.repair_rounds == 3);
    CHECK(d.pipeline(false).repair_rounds == 0);
  }

  TEST_CASE("store records round-trip") {
    CHECK(bytes_from_json(bytes_to_json("plain\n")) == "plain\n");
    const Bytes raw("\xff\x00\x80", 3);
    CHECK(bytes_to_json(raw).is_object());
    CHECK(bytes_from_json(bytes_to_json(raw)) == raw);

    std::vector<Specification> specs;
    StaticSpec st;
    st.input_format = "in";
    st.output_format = "out";
    st.per_function["f"] = {"pre", "post"};
    specs.push_back(make_spec(st));
    specs.push_back(make_spec(IoSpec{{{"a\n", raw, IoOrigin::Patched, true},
                                      {"x=ptr(0x1)", "1", IoOrigin::Traced, false}}}));
    specs.push_back(make_spec(DescSpec{"d", DescSource::Docstring}));
    for (auto& s : specs) {
      s.status = SpecStatus::Patched;
      s.candidate_index = 4;
      s.provenance = {0.6, "scripted", "abc"};
      CHECK(spec_from_json(to_json(s)) == s);
    }
    const auto r = sample_result();
    CHECK(stage_result_from_json(to_json(r)) == r);
    const auto rep = with_baseline(compute_pass_at_k(std::vector<StageResult>{r}, 3),
                                   compute_pass_at_k(std::vector<StageResult>{r}, 3));
    CHECK(report_from_json(to_json(rep)) == rep);

    StoredRun run = run_with("r1", {{true}});
    run.config = {{"k", 3}};
    run.function_status = {{"f", "translated_passing"}};
    run.spec_refs["p0"]["static"] = "specs/p0/static/candidate-1.json";
    run.exchanges = {{"translate", "d1", false}, {"repair", "d2", true}};
    run.warnings = {"w"};
    CHECK(stored_run_from_json(to_json(run)) == run);
    CHECK_THROWS_AS(stored_run_from_json(json{{"schema", "other"}}), FormatError);
  }

  TEST_CASE("run store is append-only") {
    testing::TempDir d;
    RunStore store(d.path());
    const auto run = run_with("fixed", {{true}, {false}});
    store.write(run);
    CHECK(store.read("fixed") == run);
    CHECK_THROWS_AS(store.write(run), ContractViolation);
    CHECK(store.list() == std::vector<std::string>{"fixed"});
    CHECK_THROWS_AS(store.read("missing"), ConfigError);
    const auto id = store.new_run_id("spectra");
    CHECK(id.find("spectra") != std::string::npos);
  }

  TEST_CASE("spec store keeps candidates and the accepted spec") {
    testing::TempDir d;
    SpecStore store(d.path());
    GenOutcome out;
    out.modality = Modality::Desc;
    CandidateRecord r1;
    r1.index = 1;
    r1.response = "garbage";
    r1.parse_error = "bad";
    CandidateRecord r2;
    r2.index = 2;
    auto spec = make_spec(DescSpec{"Doubles.", DescSource::ModelGenerated});
    spec.candidate_index = 2;
    r2.spec = spec;
    ValidationVerdict v;
    v.accept = true;
    v.spec = spec;
    v.spec.status = SpecStatus::SelfConsistent;
    v.artifact = "int main(void){return 0;}\n";
    r2.validation = v;
    out.candidates = {r1, r2};
    out.accepted = v.spec;
    out.provider_calls = 2;
    store.save("prog", out, Language::C);
    CHECK(store.accepted("prog", Modality::Desc) == v.spec);
    CHECK(store.first_candidate("prog", Modality::Desc) == spec);
    CHECK(store.accepted_artifact("prog", Modality::Desc) == *v.artifact);
    CHECK_FALSE(store.accepted("prog", Modality::IO).has_value());
    CHECK(store.programs() == std::vector<std::string>{"prog"});
    const auto set = store.spec_set("prog");
    CHECK(set.validated.size() == 1);
    CHECK(set.first_candidates.size() == 1);
    CHECK(std::filesystem::exists(store.dir("prog", Modality::Desc) / "candidate-2.regen.c"));
  }

  TEST_CASE("report arithmetic on the reference rows") {
    const auto doc = json::parse(read_file(testing::fixture("report_rows.json")));
    int synthesized = 0;
    for (const auto& row : doc.at("improvement_rows")) {
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(improvement_cell(row.at("baseline").at(k), row.at("treated").at(k)) == row.at("expected").at(k));
      }
      // Per-modality ablation columns are not cumulative; only pass@k rows
      // can be rebuilt from stage verdicts.
      auto monotone = [](const json& c) { return c.at(0) <= c.at(1) && c.at(1) <= c.at(2); };
      if (!monotone(row.at("baseline")) || !monotone(row.at("treated"))) continue;
      ++synthesized;
      // Synthesize stage verdicts whose prefix counts equal the row: program i
      // first passes at the smallest k whose count exceeds i.
      auto runs_for = [](const json& counts) {
        std::vector<std::vector<bool>> out;
        const int total = counts.at(2).get<int>() + 5;
        for (int i = 0; i < total; ++i) {
          std::vector<bool> v(3, false);
          for (std::size_t k = 0; k < 3; ++k) {
            if (i < counts.at(k).get<int>()) {
              v[k] = true;
              break;
            }
          }
          out.push_back(v);
        }
        return out;
      };
      const StoredRun b = run_with("base", runs_for(row.at("baseline")));
      const StoredRun t = run_with("treated", runs_for(row.at("treated")));
      const auto j = report_json(t, &b);
      CAPTURE(row.dump());
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(j.at("report").at("rows").at(k).at("correct") == row.at("treated").at(k));
        CHECK(j.at("improvement").at(k) == row.at("expected").at(k));
      }
      const std::string text = report_text(t, &b);
      CHECK(text.find(row.at("expected").at(0).get<std::string>()) != std::string::npos);
    }
    CHECK(synthesized >= 18);
    CHECK(improvement_cell(0, 5) == "n/a");
  }

  TEST_CASE("spec generation shares") {
    const auto doc = json::parse(read_file(testing::fixture("report_rows.json")));
    for (const auto& row : doc.at("specgen_shares")) {
      const int total = row.at("total");
      CHECK(share_cell(row.at("static"), total) == row.at("printed").at(0));
      CHECK(share_cell(row.at("io"), total) == row.at("printed").at(1));
      CHECK(share_cell(row.at("desc"), total) == row.at("printed").at(2));
    }
    SpecgenTally t;
    t.total = 300;
    t.found = {{Modality::Static, 189}, {Modality::IO, 294}, {Modality::Desc, 134}};
    t.patched = {{Modality::IO, 12}};
    const std::vector<Modality> mods{Modality::Static, Modality::IO, Modality::Desc};
    CHECK(tally_text(t, mods).find("44.7%") != std::string::npos);
    CHECK(tally_json(t, mods).at("modalities").at("io").at("patched") == 12);
  }

  TEST_CASE("attribution regions") {
    CHECK(region_name(0) == "none_only");
    CHECK(region_name(3) == "static+io");
    CHECK(region_name(7) == "static+io+desc");
    CHECK_THROWS_AS(region_name(8), ContractViolation);
    VennRegions v;
    v.regions = {1, 2, 0, 0, 0, 0, 0, 3};
    const auto j = attribution_json(v, 10);
    CHECK(j.at("solved") == 6);
    CHECK(j.at("regions").at("static") == 2);
  }

  TEST_CASE("corpus loading") {
    const auto programs = load_corpus(testing::fixture("corpus"));
    REQUIRE(programs.size() == 3);
    CHECK(programs[0].program_id == "reverse");
    CHECK(programs[1].program_id == "sum");
    CHECK(programs[0].tests.size() == 3);
    CHECK(programs[0].find_function("reverse_line") != nullptr);
    testing::TempDir d;
    write_file(d.path() / "p" / "main.c", "int main(void){return 0;}\n");
    write_file(d.path() / "p" / "tests" / "1.in", "x");
    CHECK_THROWS_AS(load_corpus(d.path()), FormatError);
  }

  TEST_CASE("command line: exit codes") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"--no-such-flag"}).code == 1);
    CHECK(cli({"translate"}).code == 1);
    const auto pc = cli({"--print-config", "--workers", "2"});
    CHECK(pc.code == 0);
    CHECK(json::parse(pc.out).at("workers") == 2);
    testing::TempDir d;
    CHECK(cli({"--store", d.path().string(), "report", "nope"}).code == 1);
    write_file(d.path() / "cfg.json", R"({"unknown_key": true})");
    CHECK(cli({"--config", (d.path() / "cfg.json").string(), "--print-config"}).code == 1);
    // A replay directory with no fixtures: every program is incomplete.
    std::filesystem::create_directories(d.path() / "empty");
    const auto miss = cli({"--provider", "replay", "--replay-dir", (d.path() / "empty").string(),
                           "--store", (d.path() / "s").string(), "translate",
                           testing::fixture("corpus").string(), "--mode", "baseline"});
    CHECK(miss.code == 3);
    auto missing_go = cli({"doctor", "--lang", "c"});
    CHECK(missing_go.code == 0);
    CHECK(missing_go.out.find("c") != std::string::npos);
  }

  TEST_CASE("command line: scripted corpus end to end") {
    if (!testing::have_tool("rustc")) return;
    testing::TempDir d;
    const std::vector<std::string> common{
        "--provider", "scripted", "--scripted", testing::fixture("corpus_scripted.json").string(),
        "--store", (d.path() / "store").string(), "--scratch", (d.path() / "scratch").string()};
    auto with = [&](std::vector<std::string> extra) {
      std::vector<std::string> a = common;
      a.insert(a.end(), extra.begin(), extra.end());
      return cli(a);
    };
    const auto corpus = testing::fixture("corpus").string();
    auto gen = with({"gen-specs", corpus, "--json"});
    REQUIRE(gen.code == 0);
    const auto tally = json::parse(gen.out);
    CHECK(tally.at("total") == 3);
    CHECK(tally.at("modalities").at("static").at("found") == 2);
    CHECK(tally.at("modalities").at("io").at("found") == 3);
    CHECK(tally.at("modalities").at("io").at("patched") == 1);
    CHECK(tally.at("modalities").at("desc").at("found") == 3);

    auto val = with({"validate", corpus});
    CHECK(val.code == 0);
    CHECK(val.out.find("stored specs re-validated") != std::string::npos);

    REQUIRE(with({"translate", corpus, "--mode", "baseline", "--run-id", "base"}).code == 0);
    auto spectra = with({"translate", corpus, "--run-id", "spec", "--baseline", "base", "--json"});
    REQUIRE(spectra.code == 0);
    const auto j = json::parse(spectra.out.substr(spectra.out.find('{')));
    CHECK(j.at("report").at("rows").at(0).at("correct") == 3);
    CHECK(j.at("improvement").at(0) == "200%");

    auto rep = with({"report", "spec", "--baseline", "base"});
    CHECK(rep.code == 0);
    CHECK(rep.out.find("200%") != std::string::npos);
    auto att = with({"attribution", "spec", "--json"});
    CHECK(att.code == 0);
    CHECK(json::parse(att.out).at("solved") == 3);
    // Runs are append-only: reusing an id is refused.
    CHECK(with({"translate", corpus, "--run-id", "spec"}).code == 1);
  }
}
