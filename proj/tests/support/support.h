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

// Shared helpers for the unit and acceptance tests.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"
#include "specbridge/sandbox/sandbox.h"

namespace specbridge::testing {

std::filesystem::path fixture(std::string_view rel);

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

PromptComposer default_composer();

SandboxOptions sandbox_options(int workers = 4, int timeout_ms = 5000);

// "```lang\n<code>```\n" with a newline appended to code when missing.
std::string fenced(std::string_view lang, std::string_view code);

ScriptedProvider::Rule rule(RequestTag tag, std::vector<std::string> contains,
                            std::string response, int seed = -1);

TestCase tc(std::string id, Bytes in, Bytes out);

// C program with units filled in by the C parser.
SourceProgram c_program(std::string id, std::string source, std::vector<TestCase> tests);

bool have_tool(const std::string& name);

}  // namespace specbridge::testing
