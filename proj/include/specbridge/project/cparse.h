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

// Source-level C analysis: enough of the grammar to find top-level function
// definitions, their docstrings, parameters, callees and struct layouts.
// Preprocessor lines are skipped wholesale, so function-like macros never
// become units.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specbridge/core/model.h"

namespace specbridge::c {

enum class TokKind { Ident, Number, String, Char, Punct };

struct Token {
  TokKind kind = TokKind::Punct;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Comment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;  // raw, including delimiters
};

struct Lexed {
  std::vector<Token> tokens;
  std::vector<Comment> comments;
  // Byte ranges of preprocessor directives (with continuations).
  std::vector<ByteRange> directives;
};

// Throws FormatError naming the line on an unterminated comment or literal.
Lexed lex(std::string_view source);

bool is_keyword(std::string_view ident);

struct Param {
  std::string decl;  // verbatim declaration text
  std::string type;  // declaration with the name removed, e.g. "const char *"
  std::string name;  // empty for unnamed parameters
  bool array = false;
};

struct Signature {
  std::string return_type;  // storage specifiers (static, inline, extern) removed
  bool is_static = false;
  std::string name;
  std::vector<Param> params;
  bool variadic = false;
};

// Parses "static size_t full_write(int fd, const char *buf, size_t n)".
Signature parse_signature(std::string_view signature);

struct FunctionDef {
  FunctionUnit unit;
  Signature sig;
  ByteRange body_range;  // '{' .. '}' inclusive
  std::size_t line = 0;
};

// Top-level function definitions of one file in source order. Callees are
// identifiers followed by '('; external_callees is filled by the caller that
// knows the whole project.
std::vector<FunctionDef> find_functions(std::string_view source, const std::string& file = {});

// Comment text with delimiters and leading '*' decoration removed.
std::string clean_comment(std::string_view raw);

struct Field {
  std::string type;
  std::string name;
  std::optional<std::string> array_len;
};

struct StructDef {
  std::string tag;                   // "struct point" or typedef alias
  std::vector<Field> fields;
  bool renderable = true;            // false when a field could not be parsed
};

// struct tag { ... }; and typedef struct [tag] { ... } Alias; definitions,
// keyed by "struct tag" and by alias.
std::map<std::string, StructDef> find_structs(std::string_view source);

// Scalar classification used by both tracing and FFI glue.
enum class TypeClass { Void, SignedInt, UnsignedInt, Floating, CharPtr, Pointer, Struct, Unknown };

struct TypeInfo {
  TypeClass cls = TypeClass::Unknown;
  std::string base;  // type without qualifiers and pointer stars
  int pointer_depth = 0;
  bool pointee_const = false;
};

TypeInfo classify(std::string_view type, const std::map<std::string, StructDef>& structs = {});

}  // namespace specbridge::c
