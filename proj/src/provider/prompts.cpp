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

#include "specbridge/provider/prompts.h"

#include <cctype>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

#ifndef SPECBRIDGE_TEMPLATE_DIR
#define SPECBRIDGE_TEMPLATE_DIR "templates"
#endif

namespace specbridge {

namespace {

bool is_placeholder_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) || c == '_';
}

// Calls on_text for literal runs and on_name for {name} placeholders.
template <typename OnText, typename OnName>
void scan_template(std::string_view body, OnText on_text, OnName on_name) {
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
      on_text(std::string_view(&body[i], 1));
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_placeholder_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        on_name(body.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    on_text(body.substr(i, 1));
    ++i;
  }
}

std::string functions_list(const SourceProgram& program) {
  std::vector<std::string> names;
  for (const auto& f : program.functions) names.push_back(f.name);
  return names.empty() ? std::string("main") : join(names, ", ");
}

void require_source(const SourceProgram& program) {
  if (trim(program.source).empty()) {
    throw ContractViolation("program " + program.program_id + " has empty source");
  }
  if (program.language != Language::C && program.language != Language::JavaScript) {
    throw ContractViolation("specifications are generated for C and JavaScript sources only");
  }
}

std::string render_io_pair(const IoPair& p, std::size_t index) {
  std::string out;
  if (p.origin == IoOrigin::Traced) {
    out += "Call " + std::to_string(index + 1) + ": " + p.input + " -> " + p.output;
    if (!p.comparable) out += "  (addresses are opaque)";
    out += "\n";
    return out;
  }
  out += "Input:\n" + p.input;
  if (p.input.empty() || p.input.back() != '\n') out += "\n";
  out += "Output:\n" + p.output;
  if (p.output.empty() || p.output.back() != '\n') out += "\n";
  return out;
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  scan_template(body, [](std::string_view) {},
                [&](std::string_view n) { names.emplace_back(n); });
  return names;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  std::string out;
  out.reserve(body.size() * 2);
  scan_template(
      body, [&](std::string_view t) { out += t; },
      [&](std::string_view n) {
        const auto it = bindings.find(std::string(n));
        if (it == bindings.end()) {
          throw ContractViolation("template '" + name + "' placeholder {" + std::string(n) +
                                  "} is unbound");
        }
        out += it->second;
      });
  return out;
}

const std::vector<std::string>& TemplateSet::required_names() {
  static const std::vector<std::string> names = {
      "system",          "static_spec",         "io_spec",
      "desc_spec",       "codegen_static",      "codegen_desc",
      "translate",       "translate_with_spec", "translate_all_specs",
      "repair",          "function_static_spec", "function_codegen",
      "function_translate"};
  return names;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  TemplateSet set;
  for (const auto& name : required_names()) {
    const auto path = dir / (name + ".txt");
    if (!std::filesystem::exists(path)) {
      throw ConfigError("missing prompt template " + path.string());
    }
    std::string body = read_file(path);
    // Files end with a newline; the prompt body does not.
    while (!body.empty() && body.back() == '\n') body.pop_back();
    set.set(PromptTemplate{name, std::move(body)});
  }
  return set;
}

std::filesystem::path TemplateSet::default_dir() { return SPECBRIDGE_TEMPLATE_DIR; }

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("unknown template " + std::string(name));
  return it->second;
}

void TemplateSet::set(PromptTemplate t) {
  std::string key = t.name;
  templates_.insert_or_assign(std::move(key), std::move(t));
}

std::string modality_heading(Modality m) {
  switch (m) {
    case Modality::Static: return "## Static specification";
    case Modality::IO: return "## Input/output examples";
    case Modality::Desc: return "## Description";
    case Modality::None: return "";
  }
  return "";
}

std::string render_spec_body(const Specification& spec) {
  switch (spec.modality) {
    case Modality::Static: {
      const auto& s = spec.static_spec();
      std::string out;
      if (!s.input_format.empty()) out += "Input Format: " + s.input_format + "\n";
      if (!s.output_format.empty()) out += "Output Format: " + s.output_format + "\n";
      for (const auto& [name, contract] : s.per_function) {
        if (!out.empty()) out += "\n";
        out += "Function: " + name + "\n";
        out += "Precondition: " + contract.precondition + "\n";
        out += "Postcondition: " + contract.postcondition + "\n";
      }
      return out;
    }
    case Modality::IO: {
      std::string out;
      const auto& pairs = spec.io_spec().pairs;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i && pairs[i].origin != IoOrigin::Traced) out += "---\n";
        out += render_io_pair(pairs[i], i);
      }
      return out;
    }
    case Modality::Desc: return spec.desc_spec().text + "\n";
    case Modality::None: return "";
  }
  return "";
}

std::string truncate_log(std::string_view log, std::size_t max_bytes) {
  if (log.size() <= max_bytes) return std::string(log);
  std::string out(log.substr(0, max_bytes));
  out += "\n[... " + std::to_string(log.size() - max_bytes) + " more bytes truncated]";
  return out;
}

PromptComposer::PromptComposer(TemplateSet templates, ComposerOptions options)
    : templates_(std::move(templates)), options_(options) {}

ChatRequest PromptComposer::make(RequestTag tag, double temperature, int seed,
                                 std::string_view tmpl,
                                 const std::map<std::string, std::string>& bindings) const {
  ChatRequest req;
  req.tag = tag;
  req.temperature = temperature;
  req.seed = seed;
  req.max_tokens = options_.max_tokens;
  req.messages.push_back({Role::System, templates_.get("system").render({})});
  req.messages.push_back({Role::User, templates_.get(tmpl).render(bindings)});
  return req;
}

ChatRequest PromptComposer::static_spec(const SourceProgram& program, int seed) const {
  require_source(program);
  return make(RequestTag::SpecGen, options_.temperatures.spec_gen, seed, "static_spec",
              {{"language", std::string(to_string(program.language))},
               {"source", program.source},
               {"functions", functions_list(program)}});
}

ChatRequest PromptComposer::io_spec(const SourceProgram& program, int seed) const {
  require_source(program);
  return make(RequestTag::SpecGen, options_.temperatures.spec_gen, seed, "io_spec",
              {{"language", std::string(to_string(program.language))},
               {"source", program.source},
               {"count", std::to_string(options_.io_pairs_requested)}});
}

ChatRequest PromptComposer::desc_spec(const SourceProgram& program, int seed) const {
  require_source(program);
  return make(RequestTag::SpecGen, options_.temperatures.spec_gen, seed, "desc_spec",
              {{"language", std::string(to_string(program.language))},
               {"source", program.source}});
}

ChatRequest PromptComposer::spec_request(Modality modality, const SourceProgram& program,
                                         int seed) const {
  switch (modality) {
    case Modality::Static: return static_spec(program, seed);
    case Modality::IO: return io_spec(program, seed);
    case Modality::Desc: return desc_spec(program, seed);
    case Modality::None: break;
  }
  throw ContractViolation("no specification prompt for modality none");
}

ChatRequest PromptComposer::codegen(const Specification& spec, Language language) const {
  if (spec.modality != Modality::Static && spec.modality != Modality::Desc) {
    throw ContractViolation("back-translation takes static or description specs; " +
                            std::string(to_string(spec.modality)) +
                            " specs are validated by execution");
  }
  const char* tmpl = spec.modality == Modality::Static ? "codegen_static" : "codegen_desc";
  return make(RequestTag::CodeGen, options_.temperatures.codegen, 1, tmpl,
              {{"language", std::string(to_string(language))},
               {"spec", render_spec_body(spec)}});
}

ChatRequest PromptComposer::translation(const SourceProgram& program, const Specification* spec,
                                        Language target, double temperature, int seed) const {
  require_supported_pair(program.language, target);
  std::map<std::string, std::string> b = {
      {"language", std::string(to_string(program.language))},
      {"target_language", std::string(to_string(target))},
      {"source", program.source}};
  if (spec == nullptr || spec->modality == Modality::None) {
    return make(RequestTag::Translate, temperature, seed, "translate", b);
  }
  b["spec"] = modality_heading(spec->modality) + "\n\n" + render_spec_body(*spec);
  return make(RequestTag::Translate, temperature, seed, "translate_with_spec", b);
}

ChatRequest PromptComposer::translation_all_specs(const SourceProgram& program,
                                                  std::span<const Specification> specs,
                                                  Language target, double temperature,
                                                  int seed) const {
  require_supported_pair(program.language, target);
  if (specs.empty()) return translation(program, nullptr, target, temperature, seed);
  std::string rendered;
  for (const auto& s : specs) {
    if (!rendered.empty()) rendered += "\n";
    rendered += modality_heading(s.modality) + "\n\n" + render_spec_body(s);
  }
  return make(RequestTag::Translate, temperature, seed, "translate_all_specs",
              {{"language", std::string(to_string(program.language))},
               {"target_language", std::string(to_string(target))},
               {"source", program.source},
               {"spec", rendered}});
}

ChatRequest PromptComposer::repair(std::string_view candidate, std::string_view compiler_log,
                                   Language target, int seed) const {
  if (trim(compiler_log).empty()) {
    throw ContractViolation("repair prompt needs a non-empty compiler log");
  }
  return make(RequestTag::Repair, options_.temperatures.repair, seed, "repair",
              {{"target_language", std::string(to_string(target))},
               {"candidate", std::string(candidate)},
               {"compiler_log", truncate_log(compiler_log, options_.max_compiler_log_bytes)}});
}

ChatRequest PromptComposer::function_static_spec(const FunctionUnit& unit, Language language,
                                                 int seed) const {
  return make(RequestTag::SpecGen, options_.temperatures.spec_gen, seed, "function_static_spec",
              {{"language", std::string(to_string(language))},
               {"function_name", unit.name},
               {"source", unit.signature + " " + unit.body}});
}

ChatRequest PromptComposer::function_codegen(const FunctionUnit& unit, const Specification& spec,
                                             Language language) const {
  if (spec.modality != Modality::Static && spec.modality != Modality::Desc) {
    throw ContractViolation("function back-translation takes static or description specs");
  }
  return make(RequestTag::CodeGen, options_.temperatures.codegen, 1, "function_codegen",
              {{"language", std::string(to_string(language))},
               {"function_name", unit.name},
               {"signature", unit.signature},
               {"spec", render_spec_body(spec)}});
}

ChatRequest PromptComposer::function_translation(const FunctionUnit& unit,
                                                 std::span<const Specification> specs,
                                                 Language source, Language target,
                                                 const FunctionTarget& glue, double temperature,
                                                 int seed) const {
  std::string rendered;
  for (const auto& s : specs) {
    if (!rendered.empty()) rendered += "\n";
    rendered += modality_heading(s.modality) + "\n\n" + render_spec_body(s);
  }
  return make(RequestTag::Translate, temperature, seed, "function_translate",
              {{"language", std::string(to_string(source))},
               {"target_language", std::string(to_string(target))},
               {"function_name", unit.name},
               {"source", unit.signature + " " + unit.body},
               {"export_signature", glue.export_signature},
               {"extern_decls", glue.extern_decls.empty() ? "(none)" : glue.extern_decls},
               {"spec", rendered}});
}

}  // namespace specbridge
