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

#include "support.h"

#include <stdlib.h>

#include "specbridge/core/errors.h"
#include "specbridge/project/cparse.h"
#include "specbridge/sandbox/process.h"

namespace fs = std::filesystem;

namespace specbridge::testing {

fs::path fixture(std::string_view rel) { return fs::path(SPECBRIDGE_FIXTURE_DIR) / rel; }

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "specbridge-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw EnvironmentError("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

PromptComposer default_composer() {
  return PromptComposer(TemplateSet::load(TemplateSet::default_dir()));
}

SandboxOptions sandbox_options(int workers, int timeout_ms) {
  SandboxOptions o;
  o.workers = workers;
  o.limits.wall_timeout = std::chrono::milliseconds(timeout_ms);
  o.scratch_root = fs::temp_directory_path() / "specbridge-tests";
  return o;
}

std::string fenced(std::string_view lang, std::string_view code) {
  std::string out = "```" + std::string(lang) + "\n" + std::string(code);
  if (out.back() != '\n') out += '\n';
  return out + "```\n";
}

ScriptedProvider::Rule rule(RequestTag tag, std::vector<std::string> contains,
                            std::string response, int seed) {
  ScriptedProvider::Rule r;
  r.tag = tag;
  r.contains = std::move(contains);
  r.response = std::move(response);
  r.seed = seed;
  return r;
}

TestCase tc(std::string id, Bytes in, Bytes out) {
  return TestCase{std::move(id), std::move(in), std::move(out)};
}

SourceProgram c_program(std::string id, std::string source, std::vector<TestCase> tests) {
  SourceProgram p;
  p.program_id = std::move(id);
  p.language = Language::C;
  for (auto& def : c::find_functions(source)) p.functions.push_back(std::move(def.unit));
  p.source = std::move(source);
  p.tests = std::move(tests);
  return p;
}

bool have_tool(const std::string& name) {
  ProcessOptions o;
  o.timeout = std::chrono::seconds(20);
  return run_process({name, "--version"}, o).ok();
}

}  // namespace specbridge::testing
