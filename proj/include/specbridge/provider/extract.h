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

#include <string>
#include <string_view>
#include <vector>

#include "specbridge/core/model.h"
#include "specbridge/provider/provider.h"

namespace specbridge {

struct CodeBlock {
  std::string info;  // lowercased language tag, may be empty
  std::string body;
};

std::vector<CodeBlock> fenced_blocks(std::string_view text);

// Body of the last fenced block tagged for `language`; falls back to the last
// untagged block, then to the whole response stripped. Throws
// ExtractionFailed when the result would be empty.
std::string extract_code_block(const ModelResponse& response, Language language);
std::string extract_code_block(std::string_view text, Language language);

struct ExtractOptions {
  // Functions a static spec may annotate. When the response has no
  // "Function:" headings, its single pre/postcondition pair is assigned to
  // `default_function` (or the only listed name).
  std::vector<std::string> function_names;
  std::string default_function = "main";
  // Program-level specs carry Input/Output Format; per-function ones do not.
  bool require_formats = true;
};

// Parses a SpecGen response into a Candidate spec. Throws SpecParseFailed
// on a missing heading, unknown function or zero I/O pairs.
Specification extract_spec(const ModelResponse& response, Modality modality,
                           const ExtractOptions& options = {});
Specification extract_spec(std::string_view text, Modality modality,
                           const ExtractOptions& options = {});

StaticSpec parse_static_spec(std::string_view text, const ExtractOptions& options);
IoSpec parse_io_spec(std::string_view text);

}  // namespace specbridge
