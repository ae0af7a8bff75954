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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "specbridge/core/model.h"
#include "specbridge/provider/provider.h"

namespace specbridge {

// A prompt body with {name} placeholders. "{{" and "}}" are literal braces.
struct PromptTemplate {
  std::string name;
  std::string body;

  // Throws ContractViolation naming the first placeholder without a binding.
  std::string render(const std::map<std::string, std::string>& bindings) const;
  std::vector<std::string> placeholders() const;
};

// Every template the composers use, loaded from one file per name.
class TemplateSet {
 public:
  static const std::vector<std::string>& required_names();

  // Loads <dir>/<name>.txt for every required name.
  static TemplateSet load(const std::filesystem::path& dir);
  // The directory installed with the sources (SPECBRIDGE_TEMPLATE_DIR).
  static std::filesystem::path default_dir();

  const PromptTemplate& get(std::string_view name) const;
  void set(PromptTemplate t);

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

struct TemperaturePolicy {
  double spec_gen = 0.6;
  double codegen = 0.0;
  double first_translate = 0.0;
  double later_translate = 0.3;
  double repair = 0.0;
};

struct ComposerOptions {
  TemperaturePolicy temperatures;
  std::size_t max_compiler_log_bytes = 32768;
  int io_pairs_requested = 5;
  int max_tokens = 4096;
};

// Rendered text of a spec as it appears inside prompts.
std::string render_spec_body(const Specification& spec);
std::string modality_heading(Modality m);

// Keeps the head of an oversized compiler log and marks the cut.
std::string truncate_log(std::string_view log, std::size_t max_bytes);

// Builds ChatRequests for every prompt the pipeline sends.
class PromptComposer {
 public:
  PromptComposer(TemplateSet templates, ComposerOptions options = {});

  const ComposerOptions& options() const { return options_; }

  ChatRequest static_spec(const SourceProgram& program, int seed = 1) const;
  ChatRequest io_spec(const SourceProgram& program, int seed = 1) const;
  ChatRequest desc_spec(const SourceProgram& program, int seed = 1) const;
  ChatRequest spec_request(Modality modality, const SourceProgram& program, int seed) const;

  // Back-translation prompt: the spec and the language, never the source.
  ChatRequest codegen(const Specification& spec, Language language) const;

  // spec == nullptr gives the spec-free baseline prompt.
  ChatRequest translation(const SourceProgram& program, const Specification* spec,
                          Language target, double temperature, int seed) const;
  // All given specs rendered together in one prompt.
  ChatRequest translation_all_specs(const SourceProgram& program,
                                    std::span<const Specification> specs, Language target,
                                    double temperature, int seed) const;

  ChatRequest repair(std::string_view candidate, std::string_view compiler_log,
                     Language target, int seed = 1) const;

  // Project mode: one function at a time.
  ChatRequest function_static_spec(const FunctionUnit& unit, Language language,
                                   int seed) const;
  ChatRequest function_codegen(const FunctionUnit& unit, const Specification& spec,
                               Language language) const;
  struct FunctionTarget {
    std::string export_signature;
    std::string extern_decls;
  };
  ChatRequest function_translation(const FunctionUnit& unit,
                                   std::span<const Specification> specs, Language source,
                                   Language target, const FunctionTarget& glue,
                                   double temperature, int seed) const;

 private:
  ChatRequest make(RequestTag tag, double temperature, int seed, std::string_view tmpl,
                   const std::map<std::string, std::string>& bindings) const;

  TemplateSet templates_;
  ComposerOptions options_;
};

}  // namespace specbridge
