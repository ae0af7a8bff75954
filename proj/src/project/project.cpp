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

#include "specbridge/project/project.h"

#include <algorithm>
#include <functional>

#include "json.hpp"
#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"
#include "specbridge/provider/extract.h"
#include "specbridge/sandbox/process.h"

namespace specbridge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRustLib = "libxl_translated.a";

std::string file_or_inline(const json& j, const char* inline_key, const char* file_key,
                           const fs::path& root) {
  if (j.contains(file_key)) return read_file(root / j.at(file_key).get<std::string>());
  return j.value(inline_key, std::string{});
}

FailureKind kind_of(RunVerdict v) {
  switch (v) {
    case RunVerdict::Pass: return FailureKind::None;
    case RunVerdict::WrongOutput: return FailureKind::WrongOutput;
    case RunVerdict::RuntimeError: return FailureKind::Runtime;
    case RunVerdict::Timeout: return FailureKind::Timeout;
  }
  return FailureKind::Runtime;
}

// Writes the original text of every touched file back on scope exit.
class TreeGuard {
 public:
  explicit TreeGuard(WorkingTree& tree) : tree_(tree), before_(tree.hash()) {}
  ~TreeGuard() {
    if (!released_) restore();
  }
  TreeGuard(const TreeGuard&) = delete;
  TreeGuard& operator=(const TreeGuard&) = delete;

  void edit(const std::string& rel, const std::string& text) {
    if (!saved_.contains(rel)) saved_[rel] = tree_.read(rel);
    tree_.write(rel, text);
  }
  std::string current(const std::string& rel) const { return tree_.read(rel); }

  // Returns true when the tree hash matches the pre-edit hash.
  bool restore() {
    for (const auto& [rel, text] : saved_) tree_.write(rel, text);
    saved_.clear();
    released_ = true;
    return tree_.hash() == before_;
  }
  void keep() {
    saved_.clear();
    released_ = true;
  }

 private:
  WorkingTree& tree_;
  std::string before_;
  std::map<std::string, std::string> saved_;
  bool released_ = false;
};

struct RustBuild {
  bool ok = false;
  std::string log;
  fs::path lib;
};

RustBuild build_staticlib(Project& project, const ScratchDir& dir, const std::string& crate) {
  Sandbox& sb = project.sandbox();
  sb.require(Language::Rust);
  const auto& tc = sb.toolchain(Language::Rust);
  const fs::path src = dir.path() / "lib.rs";
  write_file(src, crate);
  RustBuild out;
  out.lib = dir.path() / kRustLib;
  std::vector<std::string> argv = {tc.compile_command.empty() ? "rustc" : tc.compile_command[0],
                                   "--crate-type", "staticlib", "--crate-name", "xl_translated",
                                   "--edition", "2021", "-C", "panic=abort", "-O",
                                   "-o", out.lib.string(), src.string()};
  ProcessOptions po;
  po.cwd = dir.path();
  po.timeout = project.options().build_timeout;
  const ProcessResult r = run_process(argv, po);
  if (r.spawn_failed) throw EnvironmentError("could not run rustc: " + r.stderr_data);
  out.ok = r.ok();
  out.log = scrub_scratch_paths(r.stdout_data + r.stderr_data, sb.scratch_root(), dir.path());
  if (r.timed_out) out.log += "\n(rustc timed out)";
  return out;
}

std::vector<std::string> link_inputs(const fs::path& lib) {
  return {lib.string(), "-lpthread", "-ldl", "-lm"};
}

}  // namespace

// ---------------------------------------------------------------- manifest

ProjectManifest ProjectManifest::load(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("manifest not found: " + file.string());
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw FormatError("manifest " + file.string() + ": " + e.what());
  }
  ProjectManifest m;
  m.root = fs::absolute(file).parent_path();
  try {
    m.name = j.value("name", m.root.filename().string());
    m.entry_sources = j.at("sources").get<std::vector<std::string>>();
    m.headers = j.value("headers", std::vector<std::string>{});
    m.build_command = j.at("build").get<std::vector<std::string>>();
    if (j.contains("functions")) {
      m.function_allowlist = j.at("functions").get<std::vector<std::string>>();
    }
    const std::string compare = j.value("compare", std::string("exact"));
    if (compare != "exact" && compare != "normalized") {
      throw ConfigError("manifest compare must be exact or normalized");
    }
    m.bit_exact = compare == "exact";
    for (const auto& t : j.at("tests")) {
      E2eTest e;
      e.id = t.at("id").get<std::string>();
      e.args = t.value("args", std::vector<std::string>{});
      e.stdin_data = file_or_inline(t, "stdin", "stdin_file", m.root);
      e.expected_stdout = file_or_inline(t, "expected_stdout", "expected_stdout_file", m.root);
      e.expected_exit = t.value("expected_exit", 0);
      m.e2e_tests.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest " + file.string() + ": " + e.what());
  }
  if (m.entry_sources.empty()) throw ConfigError("manifest lists no sources");
  if (m.build_command.empty()) throw ConfigError("manifest has an empty build command");
  if (m.e2e_tests.empty()) throw ConfigError("manifest has no e2e tests");
  const bool has_out = std::find(m.build_command.begin(), m.build_command.end(), "{out}") !=
                       m.build_command.end();
  if (!has_out) throw ConfigError("build command must contain {out}");
  for (const auto& s : m.entry_sources) {
    if (!fs::exists(m.root / s)) throw ConfigError("source not found: " + s);
  }
  return m;
}

std::string_view to_string(FunctionStatus s) {
  switch (s) {
    case FunctionStatus::Original: return "original";
    case FunctionStatus::TranslatedPassing: return "translated_passing";
    case FunctionStatus::TranslatedFailing: return "translated_failing";
    case FunctionStatus::Skipped: return "skipped";
  }
  return "?";
}

bool E2eRun::passed() const {
  return build_ok && !runs.empty() &&
         std::all_of(runs.begin(), runs.end(),
                     [](const RunRecord& r) { return r.verdict == RunVerdict::Pass; });
}

FailureKind E2eRun::failure_kind() const {
  if (!build_ok) return FailureKind::Compile;
  for (const auto& r : runs) {
    if (r.verdict != RunVerdict::Pass) return kind_of(r.verdict);
  }
  return FailureKind::None;
}

// ------------------------------------------------------------ working tree

WorkingTree::WorkingTree(const ProjectManifest& manifest, const fs::path& scratch_root,
                         bool keep)
    : dir_(std::make_shared<ScratchDir>(scratch_root, keep)) {
  fs::copy(manifest.root, dir_->path(), fs::copy_options::recursive);
}

std::string WorkingTree::read(const std::string& rel) const { return read_file(path() / rel); }

void WorkingTree::write(const std::string& rel, std::string_view text) {
  write_file(path() / rel, text);
}

std::string WorkingTree::hash() const {
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& e : fs::recursive_directory_iterator(path())) {
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), path()).generic_string(), e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& [rel, p] : files) {
    const std::string body = read_file(p);
    acc += rel;
    acc.push_back('\0');
    acc += std::to_string(body.size());
    acc.push_back('\0');
    acc += sha256_hex(body);
    acc.push_back('\n');
  }
  return sha256_hex(acc);
}

// ----------------------------------------------------------------- project

Project::Project(ProjectManifest manifest, Sandbox& sandbox, ProjectOptions options)
    : manifest_(std::move(manifest)),
      sandbox_(sandbox),
      options_(options),
      tree_(manifest_, sandbox.scratch_root(), sandbox.options().keep_scratch) {}

std::vector<c::FunctionDef> Project::all_units() const {
  std::vector<c::FunctionDef> units;
  for (const auto& file : manifest_.entry_sources) {
    auto defs = c::find_functions(tree_.read(file), file);
    for (auto& d : defs) units.push_back(std::move(d));
  }
  std::set<std::string> defined;
  for (const auto& u : units) defined.insert(u.unit.name);
  for (auto& u : units) {
    u.unit.external_callees.clear();
    for (const auto& c : u.unit.callees) {
      if (!defined.contains(c)) u.unit.external_callees.insert(c);
    }
  }
  return units;
}

std::vector<c::FunctionDef> Project::decompose() const {
  std::vector<c::FunctionDef> units = all_units();
  if (!manifest_.function_allowlist) return units;
  const std::set<std::string> allow(manifest_.function_allowlist->begin(),
                                    manifest_.function_allowlist->end());
  std::erase_if(units, [&](const c::FunctionDef& d) { return !allow.contains(d.unit.name); });
  return units;
}

std::map<std::string, c::StructDef> Project::structs() const {
  std::map<std::string, c::StructDef> out;
  std::vector<std::string> files = manifest_.headers;
  files.insert(files.end(), manifest_.entry_sources.begin(), manifest_.entry_sources.end());
  for (const auto& f : files) {
    if (!fs::exists(tree_.path() / f)) continue;
    for (auto& [k, v] : c::find_structs(tree_.read(f))) out.emplace(k, std::move(v));
  }
  return out;
}

E2eRun Project::build_and_test(const std::vector<std::string>& extra_link) {
  return build_and_test_at(tree_.path(), extra_link, {});
}

E2eRun Project::build_and_test_at(const fs::path& root, const std::vector<std::string>& extra_link,
                                  const fs::path& trace_dir) {
  E2eRun out;
  ScratchDir bin(sandbox_.scratch_root(), false);
  const fs::path exe = bin.path() / manifest_.name;
  std::vector<std::string> argv;
  for (const auto& a : manifest_.build_command) {
    if (a == "{extra}") {
      argv.insert(argv.end(), extra_link.begin(), extra_link.end());
    } else {
      argv.push_back(expand_command({a}, {{"out", exe.string()}}).front());
    }
  }
  ProcessOptions po;
  po.cwd = root;
  po.timeout = options_.build_timeout;
  const ProcessResult b = run_process(argv, po);
  if (b.spawn_failed) {
    throw EnvironmentError("build command '" + argv.front() + "' could not be started");
  }
  out.build_log = scrub_scratch_paths(b.stdout_data + b.stderr_data, sandbox_.scratch_root(), root);
  out.build_ok = b.ok() && fs::exists(exe);
  if (!out.build_ok) return out;

  for (const auto& t : manifest_.e2e_tests) {
    std::vector<std::string> run_argv = {exe.string()};
    run_argv.insert(run_argv.end(), t.args.begin(), t.args.end());
    ProcessOptions ro;
    ro.cwd = root;
    ro.stdin_data = t.stdin_data;
    ro.timeout = options_.test_timeout;
    ro.max_output_bytes = sandbox_.options().limits.max_output_bytes;
    ro.memory_limit = sandbox_.options().limits.max_memory;
    ro.env[kTraceFileEnv] = trace_dir.empty() ? "" : (trace_dir / (t.id + ".trace")).string();
    const ProcessResult r = run_process(run_argv, ro);
    RunRecord rec;
    rec.test_id = t.id;
    rec.exit_code = r.exit_code;
    rec.signal = r.signal;
    rec.stdout_data = r.stdout_data;
    rec.stderr_data = r.stderr_data;
    rec.stdout_truncated = r.stdout_truncated;
    rec.duration = r.duration;
    if (r.timed_out) rec.verdict = RunVerdict::Timeout;
    else if (r.spawn_failed || r.signal != 0 || r.exit_code != t.expected_exit)
      rec.verdict = RunVerdict::RuntimeError;
    else if (!outputs_match(r.stdout_data, t.expected_stdout, manifest_.bit_exact))
      rec.verdict = RunVerdict::WrongOutput;
    else rec.verdict = RunVerdict::Pass;
    out.runs.push_back(std::move(rec));
  }
  return out;
}

// -------------------------------------------------------------- NL specs

std::map<std::string, DescSpec> docstring_specs(const std::vector<c::FunctionDef>& units) {
  std::map<std::string, DescSpec> out;
  for (const auto& u : units) {
    if (!u.unit.docstring || trim(*u.unit.docstring).empty()) continue;
    out[u.unit.name] = DescSpec{*u.unit.docstring, DescSource::Docstring};
  }
  return out;
}

// ----------------------------------------------------------------- traces

InstrumentedTree instrument(Project& project, const std::vector<c::FunctionDef>& units) {
  InstrumentedTree out;
  out.dir = std::make_shared<ScratchDir>(project.scratch_root(),
                                         project.sandbox().options().keep_scratch);
  fs::copy(project.tree().path(), out.dir->path(), fs::copy_options::recursive);
  const auto structs = project.structs();
  std::map<std::string, std::set<std::string>> per_file;
  for (const auto& u : units) per_file[u.unit.file].insert(u.unit.name);
  for (const auto& [file, names] : per_file) {
    const std::string src = read_file(out.dir->path() / file);
    write_file(out.dir->path() / file, instrument_source(src, names, structs, out.report));
  }
  return out;
}

TraceCollection collect_traces(Project& project, const InstrumentedTree& tree,
                               const std::vector<c::FunctionDef>& units) {
  TraceCollection out;
  ScratchDir logs(project.scratch_root(), project.sandbox().options().keep_scratch);
  out.run = project.build_and_test_at(tree.dir->path(), {}, logs.path());
  if (!out.run.build_ok) {
    out.warnings.push_back("instrumented build failed:\n" + out.run.build_log);
    return out;
  }
  for (const auto& r : out.run.runs) {
    if (r.verdict != RunVerdict::Pass) {
      out.warnings.push_back("instrumented run of e2e test " + r.test_id + " failed (" +
                             std::string(to_string(r.verdict)) + ")");
    }
  }
  std::set<std::string> selected;
  for (const auto& u : units) selected.insert(u.unit.name);
  for (const auto& t : project.manifest().e2e_tests) {
    const fs::path log = logs.path() / (t.id + ".trace");
    if (!fs::exists(log)) continue;
    std::vector<IoTracePair> recs;
    try {
      recs = parse_trace_log(read_file(log));
    } catch (const FormatError& e) {
      throw FormatError("trace log of test " + t.id + ": " + e.what());
    }
    for (auto& p : recs) {
      if (!selected.contains(p.function)) continue;
      p.test_id = t.id;
      out.records[p.function].push_back(std::move(p));
    }
  }
  for (const auto& u : units) {
    const auto it = out.records.find(u.unit.name);
    if (tree.report.skipped.contains(u.unit.name)) {
      out.warnings.push_back(u.unit.name + " was not instrumented: " +
                             tree.report.skipped.at(u.unit.name));
      continue;
    }
    if (it == out.records.end() || it->second.empty()) {
      out.warnings.push_back(u.unit.name + " is not executed by any e2e test; no I/O spec");
      continue;
    }
    IoSpec io;
    for (const auto& p : sample_evenly(it->second, project.options().trace_cap)) {
      io.pairs.push_back(to_io_pair(p));
    }
    Specification spec = make_spec(std::move(io));
    spec.status = SpecStatus::SelfConsistent;
    spec.provenance.provider_id = "trace";
    out.specs.emplace(u.unit.name, std::move(spec));
  }
  return out;
}

// ------------------------------------------------------------ static specs

SwapResult validate_by_swap(Project& project, const c::FunctionDef& unit,
                            const Specification& spec, Provider& provider,
                            const PromptComposer& composer) {
  if (spec.modality != Modality::Static && spec.modality != Modality::Desc) {
    throw ContractViolation("swap-in validation takes static or description specs");
  }
  SwapResult out;
  const ModelResponse resp = provider.complete(composer.function_codegen(unit.unit, spec, Language::C));
  try {
    out.regenerated = extract_code_block(resp, Language::C);
  } catch (const ExtractionFailed& e) {
    out.reason = FailureKind::Compile;
    out.detail = e.what();
    out.restored = true;
    return out;
  }

  const std::string& file = unit.unit.file;
  TreeGuard guard(project.tree());
  const std::string src = guard.current(file);
  const ByteRange r = unit.unit.byte_range;
  if (r.end > src.size() || src.compare(r.start, unit.unit.signature.size(), unit.unit.signature) != 0) {
    throw Error("splice conflict: " + unit.unit.name + " no longer sits at its recorded range in " + file);
  }
  guard.edit(file, src.substr(0, r.start) + out.regenerated + src.substr(r.end));
  E2eRun run;
  try {
    run = project.build_and_test();
  } catch (...) {
    guard.restore();
    throw;
  }
  out.restored = guard.restore();
  if (!out.restored) throw Error("working tree differs after swap of " + unit.unit.name);
  out.accept = run.passed();
  out.reason = run.failure_kind();
  if (!run.build_ok) out.detail = run.build_log;
  return out;
}

GenOutcome function_static_spec(Project& project, const c::FunctionDef& unit,
                                const GenBudget& budget, Provider& provider,
                                const PromptComposer& composer) {
  budget.validate();
  ExtractOptions extract;
  extract.function_names = {unit.unit.name};
  extract.default_function = unit.unit.name;
  extract.require_formats = false;
  auto produce = [&](int index) {
    const ChatRequest req = composer.function_static_spec(unit.unit, Language::C, index);
    CandidateRecord rec;
    rec.index = index;
    rec.prompt_digest = prompt_digest(req);
    const ModelResponse resp = provider.complete(req);
    rec.response = resp.text;
    try {
      Specification spec = extract_spec(resp, Modality::Static, extract);
      spec.candidate_index = index;
      spec.provenance.temperature = req.temperature;
      rec.spec = std::move(spec);
    } catch (const SpecParseFailed& e) {
      rec.parse_error = e.what();
    }
    return rec;
  };
  auto validator = [&](const Specification& s) {
    ValidationVerdict v;
    v.spec = s;
    const SwapResult r = validate_by_swap(project, unit, s, provider, composer);
    v.accept = r.accept;
    v.spec.status = r.accept ? SpecStatus::SelfConsistent : SpecStatus::Rejected;
    v.reason = r.accept ? "e2e tests pass with the regenerated function"
                        : std::string(to_string(r.reason)) + (r.detail.empty() ? "" : ": " + r.detail);
    v.artifact = r.regenerated;
    return v;
  };
  return search_until_valid(Modality::Static, budget.static_max, produce, validator);
}

SpecSet FunctionSpecs::as_spec_set() const {
  SpecSet s;
  if (static_spec) s.validated.emplace(Modality::Static, *static_spec);
  if (io_spec) s.validated.emplace(Modality::IO, *io_spec);
  if (desc_spec) s.validated.emplace(Modality::Desc, *desc_spec);
  s.first_candidates = s.validated;
  return s;
}

// -------------------------------------------------------------- translate

namespace {

struct FunctionAttempt {
  bool build_ok = false;
  std::string log;
  E2eRun run;
};

// Applies the C side of the swap: the translated definition becomes a
// prototype and in-project C callees lose internal linkage.
void apply_c_edit(Project& project, TreeGuard& guard, const c::FunctionDef& unit,
                  const FfiGlue& glue) {
  const std::string& file = unit.unit.file;
  const std::string src = guard.current(file);
  const ByteRange r = unit.unit.byte_range;
  if (r.end > src.size() || src.compare(r.start, unit.unit.signature.size(), unit.unit.signature) != 0) {
    throw Error("splice conflict: " + unit.unit.name + " no longer sits at its recorded range in " + file);
  }
  guard.edit(file, definition_to_prototype(src, unit));
  if (glue.c_callees.empty()) return;
  const std::set<std::string> callees(glue.c_callees.begin(), glue.c_callees.end());
  for (const auto& f : project.manifest().entry_sources) {
    const std::string cur = guard.current(f);
    const std::string stripped = strip_internal_linkage(cur, callees);
    if (stripped != cur) guard.edit(f, stripped);
  }
}

FunctionAttempt attempt(Project& project, const ScratchDir& dir,
                        const std::map<std::string, std::string>& peers,
                        const std::string& module) {
  std::vector<std::string> modules;
  for (const auto& [name, m] : peers) modules.push_back(m);
  modules.push_back(module);
  FunctionAttempt a;
  const RustBuild rb = build_staticlib(project, dir, rust_crate(modules));
  if (!rb.ok) {
    a.log = rb.log;
    return a;
  }
  a.run = project.build_and_test(link_inputs(rb.lib));
  a.build_ok = a.run.build_ok;
  if (!a.build_ok) a.log = a.run.build_log;
  return a;
}

}  // namespace

FunctionRun translate_function(Project& project, const c::FunctionDef& unit,
                               const FunctionSpecs& specs, const ProjectConfig& config,
                               Provider& provider, const PromptComposer& composer,
                               const std::map<std::string, c::FunctionDef>& all_functions,
                               std::map<std::string, std::string>& translated_modules,
                               bool keep_on_pass) {
  const PipelineConfig& pc = config.pipeline;
  pc.validate();
  FunctionRun out;
  out.name = unit.unit.name;
  out.result.program_id = unit.unit.name;

  std::set<std::string> translated;
  for (const auto& [name, m] : translated_modules) translated.insert(name);
  out.glue = generate_ffi_glue(unit, all_functions, translated);
  if (!out.glue.ok) {
    out.status = FunctionStatus::Skipped;
    out.reason = out.glue.skip_reason;
    out.result.note = "skipped: " + out.glue.skip_reason;
    return out;
  }

  const SpecSet set = specs.as_spec_set();
  const std::vector<Modality> plan = stage_plan(set, pc);
  std::vector<Modality> order = modality_order(set.available());
  if (pc.mode == PipelineMode::SingleModality || pc.mode == PipelineMode::OneShotSpec) {
    order = set.available().contains(pc.modality) ? std::vector<Modality>{pc.modality, Modality::None}
                                                   : std::vector<Modality>{Modality::None};
  }
  std::vector<Specification> all_specs;
  for (Modality m : modality_order(set.available())) {
    if (m != Modality::None) all_specs.push_back(set.validated.at(m));
  }
  const PromptComposer::FunctionTarget target{out.glue.target_export, out.glue.extern_decls};
  auto request = [&](Modality m, double temp, int seed) {
    std::vector<Specification> given;
    if (pc.mode == PipelineMode::AllSpecsTogether) given = all_specs;
    else if (m != Modality::None) given.push_back(set.validated.at(m));
    return composer.function_translation(unit.unit, given, Language::C, pc.target, target, temp,
                                         seed);
  };

  std::optional<std::string> passing_module;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    Stage stage;
    stage.temperature = stage_temperature(composer.options().temperatures, static_cast<int>(i));
    const int seed = static_cast<int>(i) + 1;
    TreeGuard guard(project.tree());
    try {
      Modality used = plan[i];
      ChatRequest req = request(used, stage.temperature, seed);
      if (pc.mode == PipelineMode::AllSpecsTogether) {
        stage.note = "all specs together (" + std::to_string(all_specs.size()) + ")";
      } else {
        while (used != Modality::None && estimate_tokens(req) > pc.token_budget) {
          const auto pos = std::find(order.begin(), order.end(), used);
          const Modality next =
              pos == order.end() || pos + 1 == order.end() ? Modality::None : *(pos + 1);
          stage.note += std::string(to_string(used)) + " prompt over token budget, degraded to " +
                        std::string(to_string(next)) + "; ";
          used = next;
          req = request(used, stage.temperature, seed);
        }
      }
      stage.modality_used = used;

      std::string candidate;
      try {
        candidate = extract_code_block(provider.complete(req), pc.target);
      } catch (const ExtractionFailed& e) {
        stage.failure_kind = FailureKind::Compile;
        stage.note += std::string("extraction failed: ") + e.what();
        out.result.stages.push_back(std::move(stage));
        continue;
      }

      apply_c_edit(project, guard, unit, out.glue);
      ScratchDir dir(project.scratch_root(), project.sandbox().options().keep_scratch);
      std::string module = rust_module(unit.unit.name, out.glue, candidate);
      FunctionAttempt a = attempt(project, dir, translated_modules, module);
      while (!a.build_ok && stage.repair_calls < pc.repair_rounds) {
        ++stage.repair_calls;
        const ChatRequest rreq = composer.repair(candidate, a.log.empty() ? "build failed" : a.log,
                                                 pc.target, stage.repair_calls);
        try {
          candidate = extract_code_block(provider.complete(rreq), pc.target);
        } catch (const ExtractionFailed&) {
          stage.note += "repair " + std::to_string(stage.repair_calls) + " returned no code; ";
          continue;
        }
        module = rust_module(unit.unit.name, out.glue, candidate);
        a = attempt(project, dir, translated_modules, module);
      }
      stage.candidate = candidate;
      if (!a.build_ok) {
        stage.failure_kind = FailureKind::Compile;
      } else {
        stage.verdict = a.run.passed() ? Verdict::Pass : Verdict::Fail;
        stage.failure_kind = a.run.failure_kind();
      }
      if (stage.verdict == Verdict::Pass && !passing_module) passing_module = module;
    } catch (const EnvironmentError& e) {
      if (!guard.restore()) throw Error("working tree differs after aborting " + out.name);
      out.result.complete = false;
      out.result.note = "environment error at stage " + std::to_string(i + 1) + ": " + e.what();
      out.status = FunctionStatus::TranslatedFailing;
      return out;
    } catch (const ReplayMiss& e) {
      if (!guard.restore()) throw Error("working tree differs after aborting " + out.name);
      out.result.complete = false;
      out.result.note = "stage " + std::to_string(i + 1) + ": " + e.what();
      out.status = FunctionStatus::TranslatedFailing;
      return out;
    }
    if (!guard.restore()) throw Error("working tree differs after stage of " + out.name);
    out.result.stages.push_back(std::move(stage));
  }

  out.status = passing_module ? FunctionStatus::TranslatedPassing : FunctionStatus::TranslatedFailing;
  if (passing_module) {
    out.passing_translation = *passing_module;
    if (keep_on_pass) {
      TreeGuard guard(project.tree());
      apply_c_edit(project, guard, unit, out.glue);
      guard.keep();
      translated_modules[out.name] = *passing_module;
    }
  }
  return out;
}

std::vector<std::string> leaves_first(const std::vector<c::FunctionDef>& units) {
  std::map<std::string, const c::FunctionDef*> by_name;
  for (const auto& u : units) by_name[u.unit.name] = &u;
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::function<void(const c::FunctionDef&)> visit = [&](const c::FunctionDef& u) {
    if (!seen.insert(u.unit.name).second) return;
    for (const auto& c : u.unit.callees) {
      const auto it = by_name.find(c);
      if (it != by_name.end()) visit(*it->second);
    }
    order.push_back(u.unit.name);
  };
  for (const auto& u : units) visit(u);
  return order;
}

ProjectRun run_project(Project& project, const ProjectConfig& config, Provider& provider,
                       const PromptComposer& composer) {
  config.pipeline.validate();
  config.budget.validate();
  require_supported_pair(Language::C, config.pipeline.target);
  if (config.pipeline.target != Language::Rust) {
    throw ConfigError("project mode generates Rust FFI glue only");
  }
  ProjectRun out;
  out.pristine_hash = project.tree().hash();
  const E2eRun pristine = project.build_and_test();
  if (!pristine.passed()) {
    throw ContractViolation("pristine project does not pass its e2e tests (" +
                            std::string(to_string(pristine.failure_kind())) + ")" +
                            (pristine.build_ok ? "" : ":\n" + pristine.build_log));
  }

  out.units = project.decompose();
  if (out.units.empty()) {
    out.report = compute_pass_at_k(std::vector<StageResult>{}, config.pipeline.k_max);
    return out;
  }
  std::map<std::string, c::FunctionDef> all;
  for (auto& u : project.all_units()) all.emplace(u.unit.name, std::move(u));

  const bool wants_specs = config.pipeline.mode != PipelineMode::Baseline;
  std::map<std::string, std::string> incomplete;
  if (wants_specs) {
    out.docstrings = docstring_specs(out.units);
    const InstrumentedTree inst = instrument(project, out.units);
    for (const auto& [fn, why] : inst.report.flagged) {
      out.warnings.push_back(fn + " traced with placeholders: " + why);
    }
    out.traces = collect_traces(project, inst, out.units);
    out.warnings.insert(out.warnings.end(), out.traces.warnings.begin(), out.traces.warnings.end());
    if (out.traces.run.build_ok) {
      for (std::size_t i = 0; i < pristine.runs.size() && i < out.traces.run.runs.size(); ++i) {
        if (pristine.runs[i].stdout_data != out.traces.run.runs[i].stdout_data) {
          out.warnings.push_back("instrumentation changed stdout of e2e test " +
                                 pristine.runs[i].test_id);
        }
      }
    }
    if (config.static_specs) {
      for (const auto& u : out.units) {
        try {
          out.static_outcomes.emplace(u.unit.name,
                                      function_static_spec(project, u, config.budget, provider, composer));
        } catch (const ReplayMiss& e) {
          incomplete[u.unit.name] = std::string("static spec generation: ") + e.what();
        }
        const auto it = out.static_outcomes.find(u.unit.name);
        if (it != out.static_outcomes.end() && it->second.aborted_error) {
          out.warnings.push_back(u.unit.name + ": static spec generation aborted: " +
                                 *it->second.aborted_error);
        }
      }
    }
  }

  std::map<std::string, const c::FunctionDef*> selected;
  for (const auto& u : out.units) selected[u.unit.name] = &u;
  std::map<std::string, std::string> accumulated;
  std::vector<StageResult> results;
  for (const auto& name : leaves_first(out.units)) {
    const c::FunctionDef& unit = *selected.at(name);
    if (const auto it = incomplete.find(name); it != incomplete.end()) {
      FunctionRun fr;
      fr.name = name;
      fr.result.program_id = name;
      fr.result.complete = false;
      fr.result.note = it->second;
      results.push_back(fr.result);
      out.functions.push_back(std::move(fr));
      continue;
    }
    FunctionSpecs specs;
    if (wants_specs) {
      if (const auto it = out.static_outcomes.find(name); it != out.static_outcomes.end()) {
        specs.static_spec = it->second.accepted;
      }
      if (const auto it = out.traces.specs.find(name); it != out.traces.specs.end()) {
        specs.io_spec = it->second;
      }
      if (const auto it = out.docstrings.find(name); it != out.docstrings.end()) {
        Specification d = make_spec(it->second);
        d.provenance.provider_id = "docstring";
        specs.desc_spec = std::move(d);
      }
    }
    std::map<std::string, std::string> independent;
    FunctionRun fr = translate_function(project, unit, specs, config, provider, composer, all,
                                        config.accumulate ? accumulated : independent,
                                        config.accumulate);
    results.push_back(fr.result);
    out.functions.push_back(std::move(fr));
  }
  out.report = compute_pass_at_k(results, config.pipeline.k_max);
  if (!config.accumulate && project.tree().hash() != out.pristine_hash) {
    throw Error("working tree differs from the pristine project after an independent run");
  }
  return out;
}

}  // namespace specbridge
