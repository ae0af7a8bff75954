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

#include "specbridge/cli/corpus.h"

#include <algorithm>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"
#include "specbridge/project/cparse.h"

namespace specbridge {

namespace fs = std::filesystem;

SourceProgram load_program(const fs::path& problem_dir) {
  SourceProgram p;
  p.program_id = problem_dir.filename().string();
  std::optional<fs::path> main;
  for (const auto& e : fs::directory_iterator(problem_dir)) {
    if (!e.is_regular_file() || e.path().stem() != "main") continue;
    const auto lang = language_from_extension(e.path().extension().string());
    if (!lang) continue;
    if (main) throw FormatError(p.program_id + ": more than one main.<ext>");
    main = e.path();
    p.language = *lang;
  }
  if (!main) throw FormatError(p.program_id + ": no main.<ext> source file");
  p.source = read_file(*main);

  const fs::path tests = problem_dir / "tests";
  if (fs::exists(tests)) {
    for (const auto& e : fs::directory_iterator(tests)) {
      if (e.path().extension() != ".in") continue;
      fs::path out = e.path();
      out.replace_extension(".out");
      if (!fs::exists(out)) {
        throw FormatError(p.program_id + ": test " + e.path().stem().string() +
                          " has no expected output");
      }
      p.tests.push_back({e.path().stem().string(), read_file(e.path()), read_file(out)});
    }
  }
  std::sort(p.tests.begin(), p.tests.end(),
            [](const TestCase& a, const TestCase& b) { return a.id < b.id; });

  if (p.language == Language::C) {
    try {
      for (auto& d : c::find_functions(p.source, main->filename().string())) {
        p.functions.push_back(std::move(d.unit));
      }
    } catch (const FormatError& e) {
      throw FormatError(p.program_id + ": " + e.what());
    }
    std::set<std::string> defined;
    for (const auto& f : p.functions) defined.insert(f.name);
    for (auto& f : p.functions) {
      for (const auto& c : f.callees) {
        if (!defined.contains(c)) f.external_callees.insert(c);
      }
    }
  }
  return p;
}

std::vector<SourceProgram> load_corpus(const fs::path& dir, std::optional<Language> language) {
  if (!fs::is_directory(dir)) throw ConfigError("corpus directory not found: " + dir.string());
  std::vector<fs::path> problems;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) problems.push_back(e.path());
  }
  std::sort(problems.begin(), problems.end());
  std::vector<SourceProgram> out;
  for (const auto& p : problems) {
    SourceProgram prog = load_program(p);
    if (language && prog.language != *language) {
      throw FormatError(prog.program_id + " is " + std::string(to_string(prog.language)) +
                        ", expected " + std::string(to_string(*language)));
    }
    out.push_back(std::move(prog));
  }
  return out;
}

}  // namespace specbridge
