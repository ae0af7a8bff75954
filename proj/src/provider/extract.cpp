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

#include "specbridge/provider/extract.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace specbridge {

namespace {

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

bool tag_matches(std::string_view info, Language language) {
  switch (language) {
    case Language::C: return info == "c" || info == "h";
    case Language::Rust: return info == "rust" || info == "rs";
    case Language::Go: return info == "go" || info == "golang";
    case Language::JavaScript: return info == "javascript" || info == "js";
    case Language::TypeScript: return info == "typescript" || info == "ts";
  }
  return false;
}

// Removes comment and markdown decoration around a heading line.
std::string_view strip_decoration(std::string_view line) {
  line = trim(line);
  bool changed = true;
  while (changed && !line.empty()) {
    changed = false;
    for (std::string_view p : {"/*", "**", "*", "#", "- ", "//"}) {
      if (line.substr(0, p.size()) == p) {
        line = trim(line.substr(p.size()));
        changed = true;
      }
    }
  }
  return line;
}

std::string_view strip_comment_close(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.substr(s.size() - 2) == "*/") s = trim(s.substr(0, s.size() - 2));
  return s;
}

// Matches "<name>[*]*:[*]*" at the start of an undecorated line and returns the
// remainder, or nullopt.
std::optional<std::string_view> match_heading(std::string_view line, std::string_view name) {
  if (!starts_with_icase(line, name)) return std::nullopt;
  std::string_view rest = line.substr(name.size());
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  rest = trim(rest);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest.remove_prefix(1);
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  return trim(rest);
}

enum class Field { InputFormat, OutputFormat, Function, Pre, Post };

std::optional<std::pair<Field, std::string_view>> static_heading(std::string_view raw) {
  const std::string_view line = strip_decoration(raw);
  static const std::vector<std::pair<std::string_view, Field>> kHeadings = {
      {"input format", Field::InputFormat},   {"output format", Field::OutputFormat},
      {"function", Field::Function},          {"pre-condition", Field::Pre},
      {"precondition", Field::Pre},           {"post-condition", Field::Post},
      {"postcondition", Field::Post},
  };
  for (const auto& [name, field] : kHeadings) {
    if (auto rest = match_heading(line, name)) return std::make_pair(field, *rest);
  }
  return std::nullopt;
}

std::string function_name_from(std::string_view value) {
  std::string out;
  for (char c : value) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      out.push_back(c);
    } else if (!out.empty()) {
      break;
    }
  }
  return out;
}

std::string finish_value(std::vector<std::string>& parts) {
  while (!parts.empty() && trim(parts.back()).empty()) parts.pop_back();
  std::string joined = join(parts, "\n");
  return std::string(strip_comment_close(joined));
}

bool is_separator(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.substr(0, 2) == "/*") s = trim(s.substr(2));
  s = strip_comment_close(s);
  return s.size() >= 3 && std::all_of(s.begin(), s.end(), [](char c) { return c == '-'; });
}

std::string finish_stream(std::vector<std::string>& lines) {
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) return {};
  std::string out = join(lines, "\n");
  out.push_back('\n');
  return out;
}

}  // namespace

std::vector<CodeBlock> fenced_blocks(std::string_view text) {
  std::vector<CodeBlock> blocks;
  const auto lines = split_lines(text);
  std::optional<CodeBlock> open;
  for (const auto line : lines) {
    if (is_fence(line)) {
      if (open) {
        blocks.push_back(std::move(*open));
        open.reset();
      } else {
        open = CodeBlock{to_lower(trim(trim(line).substr(3))), {}};
      }
      continue;
    }
    if (open) {
      open->body += line;
      open->body += '\n';
    }
  }
  // An unterminated trailing fence still counts as a block.
  if (open) blocks.push_back(std::move(*open));
  return blocks;
}

std::string extract_code_block(std::string_view text, Language language) {
  const auto blocks = fenced_blocks(text);
  std::string result;
  if (!blocks.empty()) {
    auto it = std::find_if(blocks.rbegin(), blocks.rend(),
                           [&](const CodeBlock& b) { return tag_matches(b.info, language); });
    if (it == blocks.rend()) {
      it = std::find_if(blocks.rbegin(), blocks.rend(),
                        [](const CodeBlock& b) { return b.info.empty(); });
    }
    if (it == blocks.rend()) it = blocks.rbegin();
    result = it->body;
  } else {
    result = std::string(trim(text));
    if (!result.empty()) result.push_back('\n');
  }
  if (trim(result).empty()) throw ExtractionFailed("no code in model response");
  return result;
}

std::string extract_code_block(const ModelResponse& response, Language language) {
  return extract_code_block(response.text, language);
}

StaticSpec parse_static_spec(std::string_view text, const ExtractOptions& options) {
  StaticSpec spec;
  std::optional<Field> current;
  std::vector<std::string> parts;
  std::optional<std::string> function;
  std::map<std::string, FunctionContract> contracts;
  std::map<std::string, std::pair<bool, bool>> seen;  // (pre, post)

  const std::string default_key = options.function_names.size() == 1
                                      ? options.function_names.front()
                                      : options.default_function;
  auto flush = [&] {
    if (!current) return;
    std::string value = finish_value(parts);
    parts.clear();
    const std::string key = function.value_or(default_key);
    switch (*current) {
      case Field::InputFormat: spec.input_format = std::move(value); break;
      case Field::OutputFormat: spec.output_format = std::move(value); break;
      case Field::Function: break;
      case Field::Pre:
        contracts[key].precondition = std::move(value);
        seen[key].first = true;
        break;
      case Field::Post:
        contracts[key].postcondition = std::move(value);
        seen[key].second = true;
        break;
    }
    current.reset();
  };

  for (const auto raw : split_lines(text)) {
    if (is_fence(raw)) continue;
    if (auto h = static_heading(raw)) {
      flush();
      if (h->first == Field::Function) {
        const std::string name = function_name_from(h->second);
        if (name.empty()) throw SpecParseFailed("Function heading without a name");
        function = name;
        continue;
      }
      current = h->first;
      if (!h->second.empty()) parts.emplace_back(h->second);
      continue;
    }
    if (current) parts.emplace_back(trim_right(raw));
  }
  flush();

  if (options.require_formats) {
    if (trim(spec.input_format).empty()) throw SpecParseFailed("missing Input Format");
    if (trim(spec.output_format).empty()) throw SpecParseFailed("missing Output Format");
  }
  if (contracts.empty()) throw SpecParseFailed("no Precondition/Postcondition found");
  for (auto& [name, contract] : contracts) {
    if (!seen[name].first || trim(contract.precondition).empty()) {
      throw SpecParseFailed("missing Precondition for " + name);
    }
    if (!seen[name].second || trim(contract.postcondition).empty()) {
      throw SpecParseFailed("missing Postcondition for " + name);
    }
    if (!options.function_names.empty() &&
        std::find(options.function_names.begin(), options.function_names.end(), name) ==
            options.function_names.end()) {
      throw SpecParseFailed("spec annotates unknown function " + name);
    }
  }
  spec.per_function = std::move(contracts);
  return spec;
}

IoSpec parse_io_spec(std::string_view text) {
  IoSpec spec;
  enum class State { Idle, InInput, InOutput } state = State::Idle;
  std::vector<std::string> input;
  std::vector<std::string> output;

  auto flush = [&] {
    if (state == State::InOutput) {
      spec.pairs.push_back(IoPair{finish_stream(input), finish_stream(output),
                                  IoOrigin::ModelGenerated, true});
    }
    input.clear();
    output.clear();
    state = State::Idle;
  };

  for (const auto raw : split_lines(text)) {
    if (is_fence(raw)) continue;
    const std::string_view undecorated = strip_decoration(raw);
    if (auto rest = match_heading(undecorated, "input")) {
      flush();
      state = State::InInput;
      const auto v = strip_comment_close(*rest);
      if (!v.empty()) input.emplace_back(v);
      continue;
    }
    if (auto rest = match_heading(undecorated, "output"); rest && state == State::InInput) {
      state = State::InOutput;
      const auto v = strip_comment_close(*rest);
      if (!v.empty()) output.emplace_back(v);
      continue;
    }
    if (is_separator(raw)) {
      flush();
      continue;
    }
    if (state == State::InInput) input.emplace_back(raw);
    if (state == State::InOutput) {
      const std::string_view t = trim(raw);
      const bool closes = t.size() >= 2 && t.substr(t.size() - 2) == "*/";
      output.emplace_back(closes ? strip_comment_close(raw) : raw);
    }
  }
  flush();
  if (spec.pairs.empty()) throw SpecParseFailed("no input/output pairs found");
  return spec;
}

Specification extract_spec(std::string_view text, Modality modality,
                           const ExtractOptions& options) {
  switch (modality) {
    case Modality::Static: return make_spec(parse_static_spec(text, options));
    case Modality::IO: return make_spec(parse_io_spec(text));
    case Modality::Desc: {
      const std::string_view t = trim(text);
      if (t.empty()) throw SpecParseFailed("empty description");
      return make_spec(DescSpec{std::string(t), DescSource::ModelGenerated});
    }
    case Modality::None: break;
  }
  throw ContractViolation("cannot extract a spec of modality none");
}

Specification extract_spec(const ModelResponse& response, Modality modality,
                           const ExtractOptions& options) {
  Specification spec = extract_spec(response.text, modality, options);
  spec.provenance.provider_id = response.provider_id;
  spec.provenance.prompt_digest = response.prompt_digest;
  return spec;
}

}  // namespace specbridge
