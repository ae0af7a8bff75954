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

#include "specbridge/project/ffi.h"

#include <algorithm>

#include "json.hpp"
#include "specbridge/core/text.h"

namespace specbridge {

namespace {

std::optional<std::string> rust_scalar(const std::string& base) {
  static const std::map<std::string, std::string, std::less<>> scalars = {
      {"int", "c_int"},
      {"signed", "c_int"},
      {"signed int", "c_int"},
      {"unsigned", "c_uint"},
      {"unsigned int", "c_uint"},
      {"char", "c_char"},
      {"signed char", "c_schar"},
      {"unsigned char", "c_uchar"},
      {"short", "c_short"},
      {"short int", "c_short"},
      {"unsigned short", "c_ushort"},
      {"unsigned short int", "c_ushort"},
      {"long", "c_long"},
      {"long int", "c_long"},
      {"unsigned long", "c_ulong"},
      {"unsigned long int", "c_ulong"},
      {"long long", "c_longlong"},
      {"long long int", "c_longlong"},
      {"unsigned long long", "c_ulonglong"},
      {"unsigned long long int", "c_ulonglong"},
      {"float", "c_float"},
      {"double", "c_double"},
      {"size_t", "usize"},
      {"ssize_t", "isize"},
      {"ptrdiff_t", "isize"},
      {"intptr_t", "isize"},
      {"uintptr_t", "usize"},
      {"int8_t", "i8"},
      {"int16_t", "i16"},
      {"int32_t", "i32"},
      {"int64_t", "i64"},
      {"uint8_t", "u8"},
      {"uint16_t", "u16"},
      {"uint32_t", "u32"},
      {"uint64_t", "u64"},
      {"off_t", "i64"},
      {"pid_t", "i32"},
      {"mode_t", "u32"},
      {"uid_t", "u32"},
      {"gid_t", "u32"},
      {"_Bool", "bool"},
      {"bool", "bool"},
  };
  if (const auto it = scalars.find(base); it != scalars.end()) return it->second;
  if (base.rfind("enum ", 0) == 0) return "c_int";
  return std::nullopt;
}

std::string rust_ident(const std::string& name) {
  static const std::set<std::string, std::less<>> reserved = {
      "as", "box", "break", "const", "continue", "crate", "dyn", "else", "enum", "extern",
      "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod", "move", "mut",
      "pub", "ref", "return", "self", "Self", "static", "struct", "super", "trait", "true",
      "type", "unsafe", "use", "where", "while", "async", "await", "try", "yield"};
  return reserved.contains(name) ? name + "_" : name;
}

// "(a: T, b: U) -> R", or nullopt with a reason.
std::optional<std::string> rust_signature(const c::Signature& sig, std::string& why) {
  if (sig.variadic) {
    why = "variadic function";
    return std::nullopt;
  }
  std::string params;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const auto& p = sig.params[i];
    const auto t = rust_ffi_type(p.type);
    if (!t) {
      why = "parameter " + (p.name.empty() ? std::to_string(i + 1) : p.name) + " has type '" +
            p.type + "' with no FFI rendering";
      return std::nullopt;
    }
    if (i) params += ", ";
    params += rust_ident(p.name.empty() ? "arg" + std::to_string(i) : p.name) + ": " + *t;
  }
  std::string out = "(" + params + ")";
  const c::TypeInfo ret = c::classify(sig.return_type);
  if (ret.cls != c::TypeClass::Void) {
    const auto t = rust_ffi_type(sig.return_type);
    if (!t) {
      why = "return type '" + sig.return_type + "' has no FFI rendering";
      return std::nullopt;
    }
    out += " -> " + *t;
  }
  return out;
}

}  // namespace

std::optional<std::string> rust_ffi_type(std::string_view c_type) {
  const c::TypeInfo info = c::classify(c_type);
  if (info.pointer_depth == 0) {
    if (info.cls == c::TypeClass::Void) return "()";
    return rust_scalar(info.base);
  }
  if (c_type.find('(') != std::string_view::npos) return std::nullopt;
  std::string pointee = info.base == "void" ? "c_void" : rust_scalar(info.base).value_or("c_void");
  std::string out = (info.pointee_const ? "*const " : "*mut ") + pointee;
  for (int d = 1; d < info.pointer_depth; ++d) out = "*mut " + out;
  return out;
}

FfiGlue generate_ffi_glue(const c::FunctionDef& def,
                          const std::map<std::string, c::FunctionDef>& functions,
                          const std::set<std::string>& translated) {
  FfiGlue glue;
  std::string why;
  const auto sig = rust_signature(def.sig, why);
  if (!sig) {
    glue.skip_reason = why;
    return glue;
  }
  glue.ok = true;
  glue.target_export =
      "#[no_mangle]\npub unsafe extern \"C\" fn " + def.sig.name + *sig;

  std::vector<std::string> decls;
  std::vector<std::string> uses;
  for (const auto& callee : def.unit.callees) {
    if (callee == def.sig.name) continue;
    const auto it = functions.find(callee);
    if (it == functions.end()) continue;  // external: the translation declares what it needs
    if (translated.contains(callee)) {
      uses.push_back("use super::xl_" + callee + "::" + callee + ";");
      continue;
    }
    std::string cwhy;
    const auto csig = rust_signature(it->second.sig, cwhy);
    if (!csig) {
      decls.push_back("// " + callee + " is not callable from Rust: " + cwhy);
      continue;
    }
    decls.push_back("pub fn " + callee + *csig + ";");
    glue.c_callees.push_back(callee);
  }
  if (!decls.empty()) {
    glue.extern_decls = "extern \"C\" {\n";
    for (const auto& d : decls) glue.extern_decls += "    " + d + "\n";
    glue.extern_decls += "}";
  }
  glue.peer_uses = join(uses, "\n");

  nlohmann::json cfg;
  cfg["crate_type"] = "staticlib";
  cfg["crate_name"] = "xl_translated";
  cfg["exports"] = {def.sig.name};
  cfg["imports"] = glue.c_callees;
  cfg["link_args"] = {"libxl_translated.a", "-lpthread", "-ldl", "-lm"};
  glue.binding_config = cfg.dump(2);
  return glue;
}

std::string rust_module(const std::string& function, const FfiGlue& glue,
                        std::string_view translation) {
  std::string out = "pub mod xl_" + function + " {\n";
  out += "use std::os::raw::*;\n";
  if (!glue.peer_uses.empty()) out += glue.peer_uses + "\n";
  // Declarations live in a child module and are glob-imported, so a
  // translation that declares the same functions itself does not clash.
  if (!glue.extern_decls.empty()) {
    out += "mod c_side {\nuse std::os::raw::*;\n" + glue.extern_decls + "\n}\n";
    out += "use self::c_side::*;\n";
  }
  out += translation;
  if (!translation.empty() && translation.back() != '\n') out += "\n";
  out += "}\n";
  return out;
}

std::string rust_crate(const std::vector<std::string>& modules) {
  std::string out =
      "#![allow(non_snake_case, non_camel_case_types, non_upper_case_globals, dead_code,\n"
      "         unused_imports, unused_variables, unused_mut, unused_unsafe)]\n";
  for (const auto& m : modules) out += "\n" + m;
  return out;
}

std::string strip_internal_linkage(std::string_view source, const std::set<std::string>& names) {
  const c::Lexed lx = c::lex(source);
  const auto& t = lx.tokens;
  std::vector<ByteRange> cuts;

  auto directive_between = [&](std::size_t from, std::size_t to) {
    return std::any_of(lx.directives.begin(), lx.directives.end(),
                       [&](const ByteRange& d) { return d.start >= from && d.end <= to; });
  };
  auto visit = [&](std::size_t from, std::size_t to) {
    for (std::size_t j = from; j + 1 < to; ++j) {
      if (t[j].kind == c::TokKind::Punct && t[j].text == "=") return;
      if (t[j].kind == c::TokKind::Ident && names.contains(t[j].text) && t[j + 1].text == "(") {
        for (std::size_t k = from; k < j; ++k) {
          const std::string& w = t[k].text;
          if (w == "static" || w == "inline" || w == "__inline" || w == "__inline__") {
            std::size_t end = t[k].end;
            while (end < source.size() && (source[end] == ' ' || source[end] == '\t')) ++end;
            cuts.push_back({t[k].begin, end});
          }
        }
        return;
      }
    }
  };

  std::size_t stmt = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && directive_between(t[i - 1].end, t[i].begin)) stmt = i;
    if (t[i].kind != c::TokKind::Punct) continue;
    if (t[i].text == ";") {
      visit(stmt, i);
      stmt = i + 1;
    } else if (t[i].text == "{") {
      const bool function_body = i > 0 && t[i - 1].text == ")";
      visit(stmt, i);
      int depth = 0;
      std::size_t j = i;
      for (; j < t.size(); ++j) {
        if (t[j].text == "{") ++depth;
        else if (t[j].text == "}" && --depth == 0) break;
      }
      i = j;
      if (function_body) stmt = j + 1;
    }
  }
  std::sort(cuts.begin(), cuts.end(),
            [](const ByteRange& a, const ByteRange& b) { return a.start < b.start; });
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::string out(source);
  for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) out.erase(it->start, it->size());
  return out;
}

std::string definition_to_prototype(std::string_view source, const c::FunctionDef& def) {
  std::string out(source.substr(0, def.unit.byte_range.start));
  out += def.unit.signature + ";";
  out += source.substr(def.unit.byte_range.end);
  return strip_internal_linkage(out, {def.unit.name});
}

}  // namespace specbridge
