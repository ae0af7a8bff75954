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

#include "specbridge/sandbox/sandbox.h"

#include <cctype>
#include <stdlib.h>

#include <atomic>
#include <exception>
#include <thread>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace fs = std::filesystem;

namespace specbridge {

namespace {

// @types lives next to the global node_modules; tsc needs it spelled out
// when compiling outside a project.
std::optional<std::string> node_type_roots() {
  for (const char* candidate : {"/usr/lib/node_modules/@types", "/usr/local/lib/node_modules/@types"}) {
    if (fs::exists(fs::path(candidate) / "node")) return candidate;
  }
  ProcessOptions opts;
  opts.timeout = std::chrono::seconds(10);
  const auto r = run_process({"npm", "root", "-g"}, opts);
  if (r.ok()) {
    const fs::path root = fs::path(std::string(trim(r.stdout_data))) / "@types";
    if (fs::exists(root / "node")) return root.string();
  }
  return std::nullopt;
}

// Replaces ill-formed UTF-8 with U+FFFD.
std::string utf8_lossy(std::string_view s) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    }
    if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
    bool valid = len != 0 && i + len <= s.size();
    for (std::size_t j = 1; valid && j < len; ++j) {
      const auto cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xC0) != 0x80) valid = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range code points.
    if (valid) {
      const std::uint32_t min = len == 2 ? 0x80 : len == 3 ? 0x800 : 0x10000;
      valid = cp >= min && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (valid) {
      out.append(s.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

RunVerdict classify(const ProcessResult& r, std::string_view expected, bool bit_exact) {
  if (r.timed_out) return RunVerdict::Timeout;
  if (r.spawn_failed || r.signal != 0 || r.exit_code != 0) return RunVerdict::RuntimeError;
  return outputs_match(r.stdout_data, expected, bit_exact) ? RunVerdict::Pass
                                                           : RunVerdict::WrongOutput;
}

}  // namespace

std::string_view to_string(RunVerdict v) {
  switch (v) {
    case RunVerdict::Pass: return "pass";
    case RunVerdict::WrongOutput: return "wrong_output";
    case RunVerdict::RuntimeError: return "runtime_error";
    case RunVerdict::Timeout: return "timeout";
  }
  return "?";
}

Toolchain default_toolchain(Language language) {
  Toolchain t;
  t.language = language;
  switch (language) {
    case Language::C:
      t.compile_command = {"gcc", "-O2", "-w", "-o", "{out}", "{src}", "-lm"};
      t.run_command = {"{out}"};
      t.probe_command = {"gcc", "--version"};
      t.remediation = "install gcc (e.g. the build-essential package)";
      break;
    case Language::Rust:
      t.compile_command = {"rustc", "--edition", "2021", "-O", "-o", "{out}", "{src}"};
      t.run_command = {"{out}"};
      t.probe_command = {"rustc", "--version"};
      t.remediation = "install a Rust toolchain (rustup) and put rustc on PATH";
      break;
    case Language::Go:
      t.compile_command = {"go", "build", "-o", "{out}", "{src}"};
      t.run_command = {"{out}"};
      t.probe_command = {"go", "version"};
      t.remediation = "install Go from https://go.dev/dl and put go on PATH";
      t.native = false;
      break;
    case Language::JavaScript:
      t.run_command = {"node", "{src}"};
      t.probe_command = {"node", "--version"};
      t.remediation = "install Node.js and put node on PATH";
      t.native = false;
      break;
    case Language::TypeScript: {
      t.compile_command = {"tsc",    "--outDir",      "{dir}/js", "--target", "es2020",
                           "--module", "commonjs",    "--skipLibCheck", "--noEmitOnError"};
      if (auto roots = node_type_roots()) {
        t.compile_command.insert(t.compile_command.end(),
                                 {"--types", "node", "--typeRoots", *roots});
      }
      t.compile_command.push_back("{src}");
      t.run_command = {"node", "{dir}/js/main.js"};
      t.probe_command = {"tsc", "--version"};
      t.remediation = "install TypeScript and @types/node (npm install -g typescript @types/node)";
      t.native = false;
      break;
    }
  }
  return t;
}

std::vector<std::string> expand_command(const std::vector<std::string>& tmpl,
                                        const std::map<std::string, std::string>& vars) {
  std::vector<std::string> out;
  out.reserve(tmpl.size());
  for (const auto& arg : tmpl) {
    std::string s = arg;
    for (const auto& [key, value] : vars) {
      const std::string needle = "{" + key + "}";
      for (auto pos = s.find(needle); pos != std::string::npos;
           pos = s.find(needle, pos + value.size())) {
        s.replace(pos, needle.size(), value);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool ExecOutcome::passed() const {
  if (!compile_ok || runs.empty()) return false;
  for (const auto& r : runs) {
    if (r.verdict != RunVerdict::Pass) return false;
  }
  return true;
}

FailureKind ExecOutcome::failure_kind() const {
  if (!compile_ok) return FailureKind::Compile;
  for (const auto& r : runs) {
    switch (r.verdict) {
      case RunVerdict::Pass: continue;
      case RunVerdict::WrongOutput: return FailureKind::WrongOutput;
      case RunVerdict::RuntimeError: return FailureKind::Runtime;
      case RunVerdict::Timeout: return FailureKind::Timeout;
    }
  }
  return FailureKind::None;
}

ScratchDir::ScratchDir(const fs::path& root, bool keep) : keep_(keep) {
  std::error_code ec;
  fs::create_directories(root, ec);
  std::string tmpl = (root / "job-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) {
    throw EnvironmentError("cannot create scratch directory under " + root.string());
  }
  path_ = tmpl;
}

ScratchDir::~ScratchDir() {
  if (keep_) return;
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Bytes normalize(std::string_view output) {
  const std::string text = utf8_lossy(output);
  std::vector<std::string_view> lines = split_lines(text);
  std::string out;
  std::size_t keep = lines.size();
  while (keep > 0 && trim_right(lines[keep - 1]).empty()) --keep;
  for (std::size_t i = 0; i < keep; ++i) {
    out += trim_right(lines[i]);
    out += '\n';
  }
  return out;
}

bool outputs_match(std::string_view actual, std::string_view expected, bool bit_exact) {
  if (bit_exact) return actual == expected;
  return normalize(actual) == normalize(expected);
}

Sandbox::Sandbox(SandboxOptions options) : options_(std::move(options)) {
  if (options_.limits.wall_timeout.count() <= 0 || options_.limits.max_output_bytes == 0 ||
      options_.limits.max_memory == 0) {
    throw ConfigError("run limits must be positive");
  }
  if (options_.workers < 1) throw ConfigError("worker count must be at least 1");
  for (Language l : {Language::C, Language::Rust, Language::Go, Language::JavaScript,
                     Language::TypeScript}) {
    const auto it = options_.toolchains.find(l);
    toolchains_[l] = it != options_.toolchains.end() ? it->second : default_toolchain(l);
  }
}

const Toolchain& Sandbox::toolchain(Language language) const { return toolchains_.at(language); }

fs::path Sandbox::scratch_root() const {
  return options_.scratch_root.empty() ? fs::temp_directory_path() / "specbridge"
                                       : options_.scratch_root;
}

bool Sandbox::available(Language language) {
  std::lock_guard lock(probe_mu_);
  if (const auto it = probed_.find(language); it != probed_.end()) return it->second;
  ProcessOptions opts;
  opts.timeout = std::chrono::seconds(30);
  const bool ok = run_process(toolchain(language).probe_command, opts).ok();
  probed_[language] = ok;
  return ok;
}

void Sandbox::require(Language language) {
  if (!available(language)) {
    const auto& t = toolchain(language);
    throw EnvironmentError(std::string(to_string(language)) + " toolchain unavailable (`" +
                           join(t.probe_command, " ") + "` failed): " + t.remediation);
  }
}

std::string scrub_scratch_paths(std::string log, const fs::path& scratch_root,
                                const fs::path& cwd) {
  auto replace_all = [&log](const std::string& from, const std::string& to) {
    if (from.empty()) return;
    for (std::size_t pos = 0; (pos = log.find(from, pos)) != std::string::npos; pos += to.size()) {
      log.replace(pos, from.size(), to);
    }
  };
  if (!cwd.empty()) replace_all(cwd.string() + "/", "");
  const std::string root = scratch_root.string() + "/";
  for (std::size_t pos = 0; (pos = log.find(root, pos)) != std::string::npos;) {
    std::size_t end = pos + root.size();
    while (end < log.size() && log[end] != '/' && !std::isspace(static_cast<unsigned char>(log[end])) &&
           log[end] != ':' && log[end] != '\'' && log[end] != '"') {
      ++end;
    }
    log.replace(pos, end - pos, "<scratch>");
    pos += 9;
  }
  return log;
}

BuildResult Sandbox::build(std::string_view source, Language language) {
  require(language);
  const Toolchain& t = toolchain(language);
  auto dir = std::make_shared<ScratchDir>(scratch_root(), options_.keep_scratch);
  const fs::path src = dir->path() / ("main" + std::string(source_extension(language)));
  write_file(src, source);
  const std::map<std::string, std::string> vars = {
      {"src", src.string()}, {"out", (dir->path() / "prog").string()}, {"dir", dir->path().string()}};

  BuildResult result;
  if (!t.compile_command.empty()) {
    ProcessOptions opts;
    opts.cwd = dir->path();
    opts.timeout = options_.compile_timeout;
    opts.env = {{"GOCACHE", (scratch_root() / "go-cache").string()}};
    const auto r = run_process(expand_command(t.compile_command, vars), opts);
    result.log = scrub_scratch_paths(r.stdout_data + r.stderr_data, scratch_root(), dir->path());
    if (r.spawn_failed) throw EnvironmentError("cannot start compiler: " + r.stderr_data);
    if (r.timed_out) result.log += "\n[compiler timed out]";
    if (!r.ok()) return result;
  }
  result.ok = true;
  result.artifact = BuildArtifact{dir, expand_command(t.run_command, vars), t.native};
  return result;
}

RunRecord Sandbox::run_one(const BuildArtifact& artifact, const TestCase& test) const {
  ProcessOptions opts;
  opts.cwd = artifact.dir->path();
  opts.stdin_data = test.stdin_data;
  opts.timeout = options_.limits.wall_timeout;
  opts.max_output_bytes = options_.limits.max_output_bytes;
  if (artifact.native) opts.memory_limit = options_.limits.max_memory;
  const auto r = run_process(artifact.run_argv, opts);

  RunRecord rec;
  rec.test_id = test.id;
  rec.exit_code = r.exit_code;
  rec.signal = r.signal;
  rec.stdout_data = r.stdout_data;
  rec.stderr_data = r.stderr_data;
  rec.stdout_truncated = r.stdout_truncated;
  rec.duration = r.duration;
  rec.verdict = classify(r, test.expected_stdout, options_.bit_exact);
  return rec;
}

ExecOutcome Sandbox::evaluate(std::string_view source, Language language,
                              const std::vector<TestCase>& tests) {
  if (tests.empty()) throw ContractViolation("evaluate needs at least one test");
  ExecOutcome outcome;
  BuildResult b = build(source, language);
  outcome.compile_ok = b.ok;
  outcome.compile_log = std::move(b.log);
  if (!b.ok) return outcome;
  for (const auto& t : tests) outcome.runs.push_back(run_one(*b.artifact, t));
  return outcome;
}

std::vector<ExecOutcome> Sandbox::evaluate_many(const std::vector<EvalJob>& jobs) {
  std::vector<ExecOutcome> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = evaluate(jobs[i].source, jobs[i].language, jobs[i].tests);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n =
      std::min<std::size_t>(static_cast<std::size_t>(options_.workers), jobs.size());
  std::vector<std::jthread> threads;
  for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  threads.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace specbridge
