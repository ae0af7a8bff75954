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
#include <optional>
#include <vector>

#include "specbridge/core/model.h"

namespace specbridge {

// Corpus layout: one directory per problem holding main.<ext> and a tests/
// directory of <id>.in / <id>.out pairs.
//
//   corpus/
//     p00001/main.c
//     p00001/tests/1.in
//     p00001/tests/1.out
//
// Programs and tests come back sorted by id. C programs are decomposed into
// function units. Throws FormatError on a problem directory without exactly
// one main.<ext>, an input without its expected output, or mixed languages
// when `language` is given.
std::vector<SourceProgram> load_corpus(const std::filesystem::path& dir,
                                       std::optional<Language> language = std::nullopt);

SourceProgram load_program(const std::filesystem::path& problem_dir);

}  // namespace specbridge
