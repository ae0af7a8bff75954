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

#include "specbridge/cli/commands.h"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include "CLI11.hpp"
#include "specbridge/cli/corpus.h"
#include "specbridge/cli/report.h"
#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"
#include "specbridge/project/project.h"
#include "specbridge/specgen/specgen.h"
#include "specbridge/specval/specval.h"
#include "specbridge/translate/translate.h"

namespace specbridge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::vector<ExchangeRef> exchanges_of(const RecordingProvider& rec) {
  std::vector<ExchangeRef> out;
  for (const auto& e : rec.log()) {
    out.push_back({std::string(to_string(e.request.tag)), e.digest, e.failed});
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after all threads finish.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    for (std::size_t k = 0; k < t; ++k) threads.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

// -------------------------------------------------------------------- App

App::App(AppConfig config) : config_(std::move(config)) {}
App::~App() = default;

Provider& App::provider() { return recorder(); }

RecordingProvider& App::recorder() {
  if (!recorder_) {
    if (config_.provider == "replay") {
      if (config_.replay_dir.empty()) throw ConfigError("replay provider needs --replay-dir");
      if (!fs::is_directory(config_.replay_dir)) {
        throw ConfigError("replay directory not found: " + config_.replay_dir.string());
      }
      inner_ = std::make_unique<ReplayProvider>(config_.replay_dir);
    } else if (config_.provider == "scripted") {
      if (config_.scripted_rules.empty()) throw ConfigError("scripted provider needs --scripted");
      inner_ = std::make_unique<ScriptedProvider>(ScriptedProvider::from_json_file(config_.scripted_rules));
    } else {
      LiveConfig lc;
      lc.base_url = config_.provider_url;
      lc.model = config_.model;
      lc.max_in_flight = config_.max_in_flight;
      lc.api_key = env_or_empty("SPECTRA_API_KEY");
      if (lc.api_key.empty()) throw EnvironmentError("SPECTRA_API_KEY is not set");
      inner_ = std::make_unique<LiveProvider>(lc);
    }
    recorder_ = std::make_unique<RecordingProvider>(*inner_, config_.record_dir);
  }
  return *recorder_;
}

const PromptComposer& App::composer() {
  if (!composer_) {
    const fs::path dir = config_.templates.empty() ? TemplateSet::default_dir() : config_.templates;
    ComposerOptions opts;
    opts.temperatures = config_.temperatures;
    composer_ = std::make_unique<PromptComposer>(TemplateSet::load(dir), opts);
  }
  return *composer_;
}

Sandbox& App::sandbox() {
  if (!sandbox_) {
    SandboxOptions so;
    so.limits.wall_timeout = std::chrono::milliseconds(config_.timeout_ms);
    so.scratch_root = config_.scratch;
    so.keep_scratch = config_.keep_scratch;
    so.workers = config_.workers;
    so.bit_exact = config_.bit_exact;
    sandbox_ = std::make_unique<Sandbox>(so);
  }
  return *sandbox_;
}

SpecStore& App::specs() {
  if (!specs_) specs_ = std::make_unique<SpecStore>(config_.store);
  return *specs_;
}

RunStore& App::runs() {
  if (!runs_) runs_ = std::make_unique<RunStore>(config_.store);
  return *runs_;
}

// --------------------------------------------------------------- commands

int cmd_gen_specs(App& app, const GenSpecsArgs& args, std::ostream& out) {
  app.config().budget.validate();
  const auto programs = load_corpus(args.corpus);
  SpecgenTally tally;
  tally.total = static_cast<int>(programs.size());
  const ValidationContext ctx{app.provider(), app.composer(), app.sandbox()};

  struct Slot {
    std::map<Modality, GenOutcome> outcomes;
    std::string incomplete;
  };
  std::vector<Slot> slots(programs.size());
  parallel_for(programs.size(), app.config().workers, [&](std::size_t i) {
    const SourceProgram& p = programs[i];
    for (Modality m : args.modalities) {
      try {
        GenOutcome o = generate_until_valid(ctx.provider, ctx.composer, p, m, app.config().budget,
                                            make_validator(m, p, ctx));
        if (o.aborted_error) slots[i].incomplete = *o.aborted_error;
        app.specs().save(p.program_id, o, p.language);
        slots[i].outcomes.emplace(m, std::move(o));
      } catch (const ReplayMiss& e) {
        slots[i].incomplete = e.what();
      }
    }
  });
  for (std::size_t i = 0; i < programs.size(); ++i) {
    if (!slots[i].incomplete.empty()) {
      ++tally.incomplete;
      if (!args.json) out << "incomplete: " << programs[i].program_id << ": " << slots[i].incomplete << "\n";
    }
    for (const auto& [m, o] : slots[i].outcomes) {
      if (!o.accepted) continue;
      ++tally.found[m];
      if (o.accepted->status == SpecStatus::Patched) ++tally.patched[m];
    }
  }
  if (args.json) out << tally_json(tally, args.modalities).dump(2) << "\n";
  else out << tally_text(tally, args.modalities);
  return tally.incomplete ? kExitIncomplete : kExitOk;
}

int cmd_validate(App& app, const fs::path& corpus, std::ostream& out) {
  const auto programs = load_corpus(corpus);
  int checked = 0;
  int valid = 0;
  for (const auto& p : programs) {
    for (Modality m : {Modality::Static, Modality::IO, Modality::Desc}) {
      const auto spec = app.specs().accepted(p.program_id, m);
      if (!spec) continue;
      ++checked;
      bool ok = false;
      std::string why;
      if (m == Modality::IO) {
        const IoValidationResult r = validate_io_spec(p, *spec, app.sandbox());
        ok = r.spec.has_value();
        why = r.reason;
      } else if (const auto art = app.specs().accepted_artifact(p.program_id, m)) {
        ok = replay_consistency(*art, p, app.sandbox());
        why = ok ? "" : "stored regeneration no longer passes the tests";
      } else {
        why = "no stored regeneration";
      }
      valid += ok ? 1 : 0;
      out << p.program_id << " " << to_string(m) << " " << (ok ? "ok" : "FAILED");
      if (!ok && !why.empty()) out << " (" << why << ")";
      out << "\n";
    }
  }
  out << valid << "/" << checked << " stored specs re-validated\n";
  return kExitOk;
}

int cmd_translate(App& app, const TranslateArgs& args, std::ostream& out) {
  const PipelineConfig pc = app.config().pipeline();
  pc.validate();
  const auto programs = load_corpus(args.corpus);
  std::map<std::string, SpecSet> specs;
  StoredRun run;
  for (const auto& p : programs) {
    require_supported_pair(p.language, pc.target);
    if (pc.mode == PipelineMode::Baseline) continue;
    SpecSet s = app.specs().spec_set(p.program_id);
    const auto& used = pc.mode == PipelineMode::OneShotSpec ? s.first_candidates : s.validated;
    for (const auto& [m, spec] : used) {
      run.spec_refs[p.program_id][std::string(to_string(m))] =
          fs::relative(app.specs().dir(p.program_id, m), app.config().store).generic_string();
    }
    specs.emplace(p.program_id, std::move(s));
  }
  const PipelineContext ctx{app.provider(), app.composer(), app.sandbox()};
  const CorpusRun cr = run_corpus(programs, specs, pc, ctx, app.config().workers);

  run.run_id = args.run_id.empty() ? app.runs().new_run_id(pc.mode_label()) : args.run_id;
  run.kind = "corpus";
  run.created = utc_timestamp();
  run.config = app.config().to_json();
  run.mode = pc.mode_label();
  run.k_max = pc.k_max;
  run.source = programs.empty() ? Language::C : programs.front().language;
  run.target = pc.target;
  run.results = cr.results;
  run.exchanges = exchanges_of(app.recorder());
  bool incomplete = false;
  for (const auto& r : run.results) {
    if (!r.complete) {
      incomplete = true;
      run.warnings.push_back(r.program_id + " incomplete: " + r.note);
    }
  }
  app.runs().write(run);

  std::optional<StoredRun> baseline;
  if (!args.baseline_run.empty()) baseline = app.runs().read(args.baseline_run);
  if (args.json) {
    out << report_json(run, baseline ? &*baseline : nullptr).dump(2) << "\n";
  } else {
    out << "run " << run.run_id << "\n";
    for (const auto& w : run.warnings) out << "warning: " << w << "\n";
    out << report_text(run, baseline ? &*baseline : nullptr);
  }
  return incomplete ? kExitIncomplete : kExitOk;
}

int cmd_project(App& app, const ProjectArgs& args, std::ostream& out) {
  ProjectManifest manifest = ProjectManifest::load(args.manifest);
  ProjectOptions po;
  po.trace_cap = app.config().trace_cap;
  po.test_timeout = std::chrono::milliseconds(app.config().timeout_ms);
  Project project(std::move(manifest), app.sandbox(), po);
  ProjectConfig pc;
  pc.pipeline = app.config().pipeline(true);
  pc.budget = app.config().budget;
  pc.accumulate = app.config().accumulate;
  pc.static_specs = app.config().static_specs;
  const ProjectRun pr = run_project(project, pc, app.provider(), app.composer());

  StoredRun run;
  run.run_id = args.run_id.empty() ? app.runs().new_run_id("project-" + pc.pipeline.mode_label())
                                   : args.run_id;
  run.kind = "project";
  run.created = utc_timestamp();
  run.config = app.config().to_json();
  run.config["manifest"] = fs::absolute(args.manifest).string();
  run.mode = pc.pipeline.mode_label();
  run.k_max = pc.pipeline.k_max;
  run.source = Language::C;
  run.target = pc.pipeline.target;
  bool incomplete = false;
  for (const auto& f : pr.functions) {
    run.results.push_back(f.result);
    run.function_status[f.name] = std::string(to_string(f.status));
    if (!f.result.complete) incomplete = true;
    for (const auto& [m, present] :
         std::map<std::string, bool>{{"static", pr.static_outcomes.count(f.name) &&
                                                    pr.static_outcomes.at(f.name).found()},
                                     {"io", pr.traces.specs.count(f.name) > 0},
                                     {"desc", pr.docstrings.count(f.name) > 0}}) {
      if (present) run.spec_refs[f.name][m] = m == "static" ? "validated" : m == "io" ? "traced" : "docstring";
    }
  }
  run.warnings = pr.warnings;
  run.exchanges = exchanges_of(app.recorder());
  app.runs().write(run);

  if (args.json) {
    json j = report_json(run, nullptr);
    j["functions"] = run.function_status;
    j["warnings"] = run.warnings;
    out << j.dump(2) << "\n";
    return incomplete ? kExitIncomplete : kExitOk;
  }
  out << "run " << run.run_id << "\n";
  for (const auto& w : run.warnings) out << "warning: " << w << "\n";
  for (const auto& f : pr.functions) {
    out << "  " << f.name << ": " << to_string(f.status);
    if (!f.result.stages.empty()) {
      out << " [";
      for (std::size_t i = 0; i < f.result.stages.size(); ++i) {
        const Stage& s = f.result.stages[i];
        if (i) out << ", ";
        out << to_string(s.modality_used) << "="
            << (s.verdict == Verdict::Pass ? "pass" : std::string(to_string(s.failure_kind)));
      }
      out << "]";
    }
    if (!f.reason.empty()) out << " (" << f.reason << ")";
    if (!f.result.complete) out << " (incomplete: " << f.result.note << ")";
    out << "\n";
  }
  out << report_text(run, nullptr);
  return incomplete ? kExitIncomplete : kExitOk;
}

int cmd_report(App& app, const std::string& run_id, const std::string& baseline, bool as_json,
               std::ostream& out) {
  const StoredRun run = app.runs().read(run_id);
  std::optional<StoredRun> base;
  if (!baseline.empty()) base = app.runs().read(baseline);
  if (as_json) out << report_json(run, base ? &*base : nullptr).dump(2) << "\n";
  else out << report_text(run, base ? &*base : nullptr);
  return kExitOk;
}

int cmd_attribution(App& app, const std::string& run_id, bool as_json, std::ostream& out) {
  const StoredRun run = app.runs().read(run_id);
  const VennRegions v = attribution_for(run);
  const int programs = static_cast<int>(run.results.size());
  if (as_json) out << attribution_json(v, programs).dump(2) << "\n";
  else out << attribution_text(v, programs);
  return kExitOk;
}

int cmd_doctor(App& app, const std::vector<Language>& languages, std::ostream& out) {
  std::vector<Language> langs = languages;
  if (langs.empty()) {
    langs = {Language::C, Language::Rust, Language::Go, Language::JavaScript, Language::TypeScript};
  }
  bool missing = false;
  for (Language l : langs) {
    const bool ok = app.sandbox().available(l);
    out << std::string(to_string(l)) << ": " << (ok ? "ok" : "missing");
    if (!ok) {
      out << " (" << app.sandbox().toolchain(l).remediation << ")";
      missing = true;
    }
    out << "\n";
  }
  if (app.config().provider == "live") {
    const bool key = !env_or_empty("SPECTRA_API_KEY").empty();
    out << "provider: live " << app.config().provider_url << (key ? "" : " (SPECTRA_API_KEY is not set)") << "\n";
    missing = missing || !key;
  } else {
    out << "provider: " << app.config().provider << "\n";
  }
  return missing ? kExitEnvironment : kExitOk;
}

// -------------------------------------------------------------------- CLI

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"specbridge: specification-guided program translation"};
  // At most one subcommand; --print-config alone is also a complete request.
  cli.require_subcommand(0, 1);
  cli.set_version_flag("--version", "specbridge 0.1.0");

  std::string config_file;
  bool print_config = false;
  // Global flags land in a JSON overlay only when given.
  json flags = json::object();
  std::string provider, replay_dir, scripted, record_dir, store, scratch, mode, target, templates;
  int k = 0, repair = 0, workers = 0, timeout = 0, trace_cap = 0;
  int static_max = 0, desc_max = 0, io_max = 0, batch = 0;
  bool keep_scratch = false, bit_exact = false, accumulate = false, no_static = false;

  cli.add_option("--config", config_file, "JSON config file");
  cli.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  auto* o_provider = cli.add_option("--provider", provider, "replay | scripted | live");
  auto* o_replay = cli.add_option("--replay-dir", replay_dir, "replay fixture directory");
  auto* o_scripted = cli.add_option("--scripted", scripted, "scripted provider rules (JSON)");
  auto* o_record = cli.add_option("--record-dir", record_dir, "write every exchange as a replay fixture");
  auto* o_store = cli.add_option("--store", store, "spec and run store directory");
  auto* o_scratch = cli.add_option("--scratch", scratch, "scratch directory root");
  auto* o_keep = cli.add_flag("--keep-scratch", keep_scratch, "keep build directories");
  auto* o_workers = cli.add_option("--workers", workers, "parallel programs");
  auto* o_timeout = cli.add_option("--timeout-ms", timeout, "per-test wall clock limit");
  auto* o_exact = cli.add_flag("--bit-exact", bit_exact, "compare outputs byte for byte");
  auto* o_templates = cli.add_option("--templates", templates, "prompt template directory");
  auto* o_static = cli.add_option("--static-max", static_max, "static spec candidate budget");
  auto* o_desc = cli.add_option("--desc-max", desc_max, "description spec candidate budget");
  auto* o_io = cli.add_option("--io-max", io_max, "I/O spec candidate budget");
  auto* o_batch = cli.add_option("--batch", batch, "candidates per batch");

  auto* gen = cli.add_subcommand("gen-specs", "generate and validate specifications for a corpus");
  GenSpecsArgs gen_args;
  std::vector<std::string> modalities;
  gen->add_option("corpus", gen_args.corpus, "corpus directory")->required();
  gen->add_option("--modality", modalities, "static, io, desc (repeatable; default all)")
      ->delimiter(',');
  gen->add_flag("--json", gen_args.json, "machine-readable output");

  auto* val = cli.add_subcommand("validate", "re-validate stored specifications");
  fs::path val_corpus;
  val->add_option("corpus", val_corpus, "corpus directory")->required();

  auto add_pipeline_flags = [&](CLI::App* sub) {
    std::vector<CLI::Option*> opts;
    opts.push_back(sub->add_option("--mode", mode,
                                   "spectra | baseline | all-together | single:<m> | one-shot:<m>"));
    opts.push_back(sub->add_option("--target", target, "target language"));
    opts.push_back(sub->add_option("-k,--k", k, "stages (pass@1..k)"));
    opts.push_back(sub->add_option("--repair-rounds", repair, "compiler-feedback repair rounds"));
    return opts;
  };

  auto* tr = cli.add_subcommand("translate", "translate a corpus and record a run");
  TranslateArgs tr_args;
  tr->add_option("corpus", tr_args.corpus, "corpus directory")->required();
  tr->add_option("--run-id", tr_args.run_id, "run id (default: timestamp-mode)");
  tr->add_option("--baseline", tr_args.baseline_run, "baseline run for improvement columns");
  tr->add_flag("--json", tr_args.json, "machine-readable output");
  const auto tr_opts = add_pipeline_flags(tr);

  auto* pj = cli.add_subcommand("project", "translate a C project function by function");
  ProjectArgs pj_args;
  pj->add_option("manifest", pj_args.manifest, "project manifest (JSON)")->required();
  pj->add_option("--run-id", pj_args.run_id, "run id");
  pj->add_flag("--json", pj_args.json, "machine-readable output");
  auto* o_acc = pj->add_flag("--accumulate", accumulate, "keep passing translations for later functions");
  auto* o_nostatic = pj->add_flag("--no-static-specs", no_static, "skip per-function static specs");
  auto* o_cap = pj->add_option("--trace-cap", trace_cap, "I/O pairs kept per function");
  const auto pj_opts = add_pipeline_flags(pj);

  auto* rep = cli.add_subcommand("report", "render pass@k for a stored run");
  std::string rep_run, rep_base;
  bool rep_json = false;
  rep->add_option("run", rep_run, "run id")->required();
  rep->add_option("--baseline", rep_base, "baseline run id");
  rep->add_flag("--json", rep_json, "machine-readable output");

  auto* att = cli.add_subcommand("attribution", "per-modality solve partition of a run");
  std::string att_run;
  bool att_json = false;
  att->add_option("run", att_run, "run id")->required();
  att->add_flag("--json", att_json, "machine-readable output");

  auto* doc = cli.add_subcommand("doctor", "probe toolchains and provider settings");
  std::vector<std::string> doc_langs;
  doc->add_option("--lang", doc_langs, "languages to probe (default all)")->delimiter(',');

  try {
    cli.parse(argc, argv);
    if (cli.get_subcommands().empty() && !print_config) {
      throw CLI::RequiredError("A subcommand");
    }
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (o_provider->count()) flags["provider"] = provider;
    if (o_replay->count()) flags["replay_dir"] = replay_dir;
    if (o_scripted->count()) flags["scripted_rules"] = scripted;
    if (o_record->count()) flags["record_dir"] = record_dir;
    if (o_store->count()) flags["store"] = store;
    if (o_scratch->count()) flags["scratch"] = scratch;
    if (o_keep->count()) flags["keep_scratch"] = keep_scratch;
    if (o_workers->count()) flags["workers"] = workers;
    if (o_timeout->count()) flags["timeout_ms"] = timeout;
    if (o_exact->count()) flags["bit_exact"] = bit_exact;
    if (o_templates->count()) flags["templates"] = templates;
    if (o_static->count()) flags["budget"]["static"] = static_max;
    if (o_desc->count()) flags["budget"]["desc"] = desc_max;
    if (o_io->count()) flags["budget"]["io"] = io_max;
    if (o_batch->count()) flags["budget"]["batch"] = batch;
    for (const auto* opts : {&tr_opts, &pj_opts}) {
      if ((*opts)[0]->count()) flags["mode"] = mode;
      if ((*opts)[1]->count()) flags["target"] = target;
      if ((*opts)[2]->count()) flags["k"] = k;
    }
    if (tr_opts[3]->count()) flags["repair_rounds"] = repair;
    if (pj_opts[3]->count()) flags["project_repair_rounds"] = repair;
    if (o_acc->count()) flags["accumulate"] = accumulate;
    if (o_nostatic->count()) flags["static_specs"] = !no_static;
    if (o_cap->count()) flags["trace_cap"] = trace_cap;

    std::map<std::string, std::string> env;
    if (const char* u = std::getenv("SPECTRA_PROVIDER_URL")) env["SPECTRA_PROVIDER_URL"] = u;
    const json file = config_file.empty() ? json(nullptr) : load_config_file(config_file);
    AppConfig config = resolve_config(file, flags, env);
    if (print_config) {
      out << config.to_json().dump(2) << "\n";
      return kExitOk;
    }
    App app(std::move(config));

    if (gen->parsed()) {
      if (!modalities.empty()) {
        gen_args.modalities.clear();
        for (const auto& m : modalities) {
          const Modality mm = parse_modality(m);
          if (mm == Modality::None) throw ConfigError("modality must be static, io or desc");
          gen_args.modalities.push_back(mm);
        }
      }
      return cmd_gen_specs(app, gen_args, out);
    }
    if (val->parsed()) return cmd_validate(app, val_corpus, out);
    if (tr->parsed()) return cmd_translate(app, tr_args, out);
    if (pj->parsed()) return cmd_project(app, pj_args, out);
    if (rep->parsed()) return cmd_report(app, rep_run, rep_base, rep_json, out);
    if (att->parsed()) return cmd_attribution(app, att_run, att_json, out);
    if (doc->parsed()) {
      std::vector<Language> langs;
      for (const auto& l : doc_langs) langs.push_back(parse_language(l));
      return cmd_doctor(app, langs, out);
    }
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EnvironmentError& e) {
    err << "environment error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const ReplayMiss& e) {
    err << "incomplete: " << e.what() << "\n";
    return kExitIncomplete;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitIncomplete;
  }
}

}  // namespace specbridge
