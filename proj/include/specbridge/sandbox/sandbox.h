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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/sandbox/process.h"

namespace specbridge {

// Command templates expand {src} (source file), {out} (artifact path) and
// {dir} (scratch directory).
struct Toolchain {
  Language language = Language::C;
  std::vector<std::string> compile_command;  // empty for interpreted languages
  std::vector<std::string> run_command;
  std::vector<std::string> probe_command;
  std::string remediation;
  // Apply the memory cap when running; off for runtimes that reserve large
  // address space up front (Go, node).
  bool native = true;
};

Toolchain default_toolchain(Language language);

struct RunLimits {
  std::chrono::milliseconds wall_timeout{10'000};
  std::size_t max_output_bytes = 1 << 20;
  std::size_t max_memory = std::size_t{512} << 20;
};

enum class RunVerdict { Pass, WrongOutput, RuntimeError, Timeout };
std::string_view to_string(RunVerdict v);

struct RunRecord {
  std::string test_id;
  int exit_code = -1;
  int signal = 0;
  Bytes stdout_data;
  Bytes stderr_data;
  bool stdout_truncated = false;
  std::chrono::milliseconds duration{0};
  RunVerdict verdict = RunVerdict::RuntimeError;
};

struct ExecOutcome {
  bool compile_ok = false;
  std::string compile_log;
  std::vector<RunRecord> runs;

  // Compiled, and every run passed.
  bool passed() const;
  // First failure kind in run order; None when passed.
  FailureKind failure_kind() const;
};

// A fresh directory, removed on destruction unless kept.
class ScratchDir {
 public:
  ScratchDir(const std::filesystem::path& root, bool keep);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool keep_;
};

struct BuildArtifact {
  std::shared_ptr<ScratchDir> dir;
  std::vector<std::string> run_argv;
  bool native = true;
};

struct BuildResult {
  bool ok = false;
  std::string log;
  std::optional<BuildArtifact> artifact;
};

struct SandboxOptions {
  std::map<Language, Toolchain> toolchains;  // overrides of default_toolchain
  RunLimits limits;
  std::chrono::milliseconds compile_timeout{120'000};
  std::filesystem::path scratch_root;  // empty: <tmp>/specbridge
  bool keep_scratch = false;
  int workers = 4;
  bool bit_exact = false;
};

// Decodes lossily as UTF-8, strips trailing whitespace per line and trailing
// blank lines, and ends with exactly one newline (empty stays empty).
Bytes normalize(std::string_view output);
bool outputs_match(std::string_view actual, std::string_view expected, bool bit_exact = false);

struct EvalJob {
  std::string source;
  Language language = Language::C;
  std::vector<TestCase> tests;
};

class Sandbox {
 public:
  explicit Sandbox(SandboxOptions options = {});

  const SandboxOptions& options() const { return options_; }
  const Toolchain& toolchain(Language language) const;

  // Runs the probe command once per language and caches the answer.
  bool available(Language language);
  // Throws EnvironmentError with the toolchain's remediation hint.
  void require(Language language);

  BuildResult build(std::string_view source, Language language);
  RunRecord run_one(const BuildArtifact& artifact, const TestCase& test) const;
  ExecOutcome evaluate(std::string_view source, Language language,
                       const std::vector<TestCase>& tests);
  // Parallel evaluate() over up to options().workers threads; results keep
  // the order of `jobs`.
  std::vector<ExecOutcome> evaluate_many(const std::vector<EvalJob>& jobs);

  std::filesystem::path scratch_root() const;

 private:
  SandboxOptions options_;
  std::map<Language, Toolchain> toolchains_;
  std::mutex probe_mu_;
  std::map<Language, bool> probed_;
};

// Makes a tool log independent of where scratch directories landed: paths
// inside `cwd` become relative and any other directory directly under
// `scratch_root` becomes "<scratch>". Repair prompts embed these logs, so
// they must not vary between otherwise identical runs.
std::string scrub_scratch_paths(std::string log, const std::filesystem::path& scratch_root,
                                const std::filesystem::path& cwd = {});

std::vector<std::string> expand_command(const std::vector<std::string>& tmpl,
                                        const std::map<std::string, std::string>& vars);

}  // namespace specbridge
