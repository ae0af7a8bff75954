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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/project/cparse.h"
#include "specbridge/project/ffi.h"
#include "specbridge/project/instrument.h"
#include "specbridge/project/trace.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"
#include "specbridge/sandbox/sandbox.h"
#include "specbridge/specgen/specgen.h"
#include "specbridge/translate/translate.h"

namespace specbridge {

struct E2eTest {
  std::string id;
  std::vector<std::string> args;
  Bytes stdin_data;
  Bytes expected_stdout;
  int expected_exit = 0;
};

// Manifest file (JSON):
//   {
//     "name": "mini-cat",
//     "sources": ["cat.c"],            entry C files, relative to the manifest
//     "headers": ["util.h"],           optional
//     "build": ["gcc", "-o", "{out}", "cat.c", "{extra}"],
//     "tests": [{"id": "plain", "args": ["in.txt"], "stdin": "",
//                "expected_stdout": "...", "expected_exit": 0}],
//     "functions": ["full_write"],     optional allowlist
//     "compare": "exact"               or "normalized"
//   }
// "stdin_file" / "expected_stdout_file" may replace the inline strings.
// The build runs in the project root; {out} is the executable to produce and
// an argument equal to "{extra}" expands to extra link inputs (possibly none).
struct ProjectManifest {
  std::string name;
  std::filesystem::path root;
  std::vector<std::string> entry_sources;
  std::vector<std::string> headers;
  std::vector<std::string> build_command;
  std::vector<E2eTest> e2e_tests;
  std::optional<std::vector<std::string>> function_allowlist;
  bool bit_exact = true;

  static ProjectManifest load(const std::filesystem::path& file);
};

enum class FunctionStatus { Original, TranslatedPassing, TranslatedFailing, Skipped };
std::string_view to_string(FunctionStatus s);

struct E2eRun {
  bool build_ok = false;
  std::string build_log;
  std::vector<RunRecord> runs;

  bool passed() const;
  FailureKind failure_kind() const;
};

// A scratch copy of the project that swaps mutate; the user's tree is never
// written.
class WorkingTree {
 public:
  WorkingTree(const ProjectManifest& manifest, const std::filesystem::path& scratch_root,
              bool keep);

  const std::filesystem::path& path() const { return dir_->path(); }
  std::string read(const std::string& rel) const;
  void write(const std::string& rel, std::string_view text);
  // SHA-256 over sorted relative paths and contents.
  std::string hash() const;

 private:
  std::shared_ptr<ScratchDir> dir_;
};

struct ProjectOptions {
  std::size_t trace_cap = 20;
  std::chrono::milliseconds build_timeout{120'000};
  std::chrono::milliseconds test_timeout{10'000};
};

class Project {
 public:
  Project(ProjectManifest manifest, Sandbox& sandbox, ProjectOptions options = {});

  const ProjectManifest& manifest() const { return manifest_; }
  WorkingTree& tree() { return tree_; }

  // Units of every entry source in the current working tree, allowlist
  // filtered, source order. external_callees are filled in project-wide.
  std::vector<c::FunctionDef> decompose() const;
  std::vector<c::FunctionDef> all_units() const;
  std::map<std::string, c::StructDef> structs() const;

  // Builds the working tree (or `root`) and runs every e2e test. With a
  // trace_dir, each test's trace stream goes to <trace_dir>/<test id>.trace.
  E2eRun build_and_test(const std::vector<std::string>& extra_link = {});
  E2eRun build_and_test_at(const std::filesystem::path& root,
                           const std::vector<std::string>& extra_link,
                           const std::filesystem::path& trace_dir);

  std::filesystem::path scratch_root() const { return sandbox_.scratch_root(); }
  Sandbox& sandbox() { return sandbox_; }
  const ProjectOptions& options() const { return options_; }

 private:
  ProjectManifest manifest_;
  Sandbox& sandbox_;
  ProjectOptions options_;
  WorkingTree tree_;
};

std::map<std::string, DescSpec> docstring_specs(const std::vector<c::FunctionDef>& units);

struct InstrumentedTree {
  std::shared_ptr<ScratchDir> dir;
  InstrumentReport report;
};

// Copies the working tree and rewrites every entry source.
InstrumentedTree instrument(Project& project, const std::vector<c::FunctionDef>& units);

struct TraceCollection {
  std::map<std::string, std::vector<IoTracePair>> records;  // all records, per function
  std::map<std::string, Specification> specs;               // capped, origin Traced
  std::vector<std::string> warnings;
  E2eRun run;  // the instrumented e2e run (stdout must match the pristine run)
};

TraceCollection collect_traces(Project& project, const InstrumentedTree& tree,
                               const std::vector<c::FunctionDef>& units);

struct SwapResult {
  bool accept = false;
  FailureKind reason = FailureKind::None;
  std::string detail;
  std::string regenerated;
  bool restored = false;  // tree hash identical afterwards
};

SwapResult validate_by_swap(Project& project, const c::FunctionDef& unit,
                            const Specification& spec, Provider& provider,
                            const PromptComposer& composer);

GenOutcome function_static_spec(Project& project, const c::FunctionDef& unit,
                                const GenBudget& budget, Provider& provider,
                                const PromptComposer& composer);

struct FunctionSpecs {
  std::optional<Specification> static_spec;
  std::optional<Specification> io_spec;
  std::optional<Specification> desc_spec;

  SpecSet as_spec_set() const;
};

struct FunctionRun {
  std::string name;
  FunctionStatus status = FunctionStatus::Original;
  std::string reason;
  StageResult result;
  FfiGlue glue;
  std::string passing_translation;  // Rust module of the passing candidate
};

struct ProjectConfig {
  PipelineConfig pipeline{PipelineMode::SpecTra, Modality::None, 3, 3, Language::Rust};
  GenBudget budget;
  bool accumulate = false;
  bool static_specs = true;
};

// Translates one function with FFI glue, rebuilds, runs the e2e tests. The
// tree is restored unless `keep_on_pass` and the function passed.
FunctionRun translate_function(Project& project, const c::FunctionDef& unit,
                               const FunctionSpecs& specs, const ProjectConfig& config,
                               Provider& provider, const PromptComposer& composer,
                               const std::map<std::string, c::FunctionDef>& all_functions,
                               std::map<std::string, std::string>& translated_modules,
                               bool keep_on_pass);

// Callees before callers; cycles fall back to source order.
std::vector<std::string> leaves_first(const std::vector<c::FunctionDef>& units);

struct ProjectRun {
  std::vector<c::FunctionDef> units;
  std::map<std::string, DescSpec> docstrings;
  TraceCollection traces;
  std::map<std::string, GenOutcome> static_outcomes;
  std::vector<FunctionRun> functions;  // processing order
  PassAtKReport report;
  std::vector<std::string> warnings;
  std::string pristine_hash;
};

ProjectRun run_project(Project& project, const ProjectConfig& config, Provider& provider,
                       const PromptComposer& composer);

}  // namespace specbridge
