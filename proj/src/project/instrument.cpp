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

#include "specbridge/project/instrument.h"

#include <algorithm>

#include "specbridge/core/text.h"
#include "specbridge/project/trace.h"

namespace specbridge {

namespace {

// Shared by every instrumented file; each translation unit gets its own
// static copy and its own stream handle (append mode keeps records whole).
constexpr std::string_view kPrelude = R"XL(/* specbridge trace helpers */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
struct __xl_buf { char d[16384]; size_t n; };
__attribute__((unused)) static FILE *__xl_trace_stream(void) {
  static FILE *f;
  static int tried;
  if (!tried) {
    const char *p = getenv("SPECBRIDGE_TRACE_FILE");
    tried = 1;
    if (p && *p) {
      f = fopen(p, "a");
      if (f) {
        fseek(f, 0, SEEK_END);
        if (ftell(f) == 0) { fputs("# specbridge-trace v1\n", f); fflush(f); }
      }
    }
  }
  return f;
}
__attribute__((unused)) static void __xl_put(struct __xl_buf *b, const char *s, size_t n) {
  if (n > sizeof b->d - b->n) n = sizeof b->d - b->n;
  memcpy(b->d + b->n, s, n);
  b->n += n;
}
__attribute__((unused)) static void __xl_putesc(struct __xl_buf *b, const char *s, size_t n) {
  static const char hex[] = "0123456789abcdef";
  size_t i;
  for (i = 0; i < n; i++) {
    unsigned char c = (unsigned char)s[i];
    char e[4];
    if (c == '\\' || c == '|' || c == ';' || c == '=') { e[0] = '\\'; e[1] = (char)c; __xl_put(b, e, 2); }
    else if (c == '\n') __xl_put(b, "\\n", 2);
    else if (c < 0x20 || c >= 0x7f) { e[0] = '\\'; e[1] = 'x'; e[2] = hex[c >> 4]; e[3] = hex[c & 15]; __xl_put(b, e, 4); }
    else __xl_put(b, (const char *)&s[i], 1);
  }
}
__attribute__((unused)) static void __xl_int(struct __xl_buf *b, long long v) {
  char t[32];
  int n = snprintf(t, sizeof t, "%lld", v);
  __xl_put(b, t, (size_t)n);
}
__attribute__((unused)) static void __xl_uint(struct __xl_buf *b, unsigned long long v) {
  char t[32];
  int n = snprintf(t, sizeof t, "%llu", v);
  __xl_put(b, t, (size_t)n);
}
__attribute__((unused)) static void __xl_dbl(struct __xl_buf *b, double v) {
  char t[64];
  int n = snprintf(t, sizeof t, "%.17g", v);
  __xl_put(b, t, (size_t)n);
}
__attribute__((unused)) static void __xl_str(struct __xl_buf *b, const char *s, size_t max) {
  if (!s) { __xl_put(b, "NULL", 4); return; }
  __xl_put(b, "\"", 1);
  __xl_putesc(b, s, strnlen(s, max));
  __xl_put(b, "\"", 1);
}
__attribute__((unused)) static void __xl_ptr(struct __xl_buf *b, const void *p) {
  char t[48];
  int n;
  if (!p) { __xl_put(b, "NULL", 4); return; }
  n = snprintf(t, sizeof t, "ptr(%p)", p);
  __xl_put(b, t, (size_t)n);
}
__attribute__((unused)) static void __xl_begin(struct __xl_buf *b, const char *fn, unsigned long idx) {
  char t[32];
  int n = snprintf(t, sizeof t, " | %lu | ", idx);
  __xl_put(b, fn, strlen(fn));
  __xl_put(b, t, (size_t)n);
}
__attribute__((unused)) static void __xl_end(struct __xl_buf *b, FILE *f) {
  if (b->n == sizeof b->d) b->n--;
  b->d[b->n++] = '\n';
  fwrite(b->d, 1, b->n, f);
  fflush(f);
}
/* end specbridge trace helpers */
)XL";

std::string mangle(std::string_view type) {
  std::string out;
  for (char c : type) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

struct Emitter {
  const std::map<std::string, c::StructDef>& structs;
  std::set<std::string> emitted;  // struct helpers already in this file
  std::string pending;            // helpers to place before the next function
  bool placeholder = false;

  std::string render(const std::string& buf, const std::string& expr, const std::string& type) {
    const c::TypeInfo info = c::classify(type, structs);
    switch (info.cls) {
      case c::TypeClass::Void: return "__xl_put(" + buf + ", \"void\", 4);";
      case c::TypeClass::SignedInt: return "__xl_int(" + buf + ", (long long)(" + expr + "));";
      case c::TypeClass::UnsignedInt:
        return "__xl_uint(" + buf + ", (unsigned long long)(" + expr + "));";
      case c::TypeClass::Floating: return "__xl_dbl(" + buf + ", (double)(" + expr + "));";
      case c::TypeClass::CharPtr:
        return "__xl_str(" + buf + ", (const char *)(" + expr + "), " +
               std::to_string(kTraceStringLimit) + ");";
      case c::TypeClass::Pointer: return "__xl_ptr(" + buf + ", (const void *)(" + expr + "));";
      case c::TypeClass::Struct:
        struct_helper(info.base);
        return "__xl_render_" + mangle(info.base) + "(" + buf + ", &(" + expr + "));";
      case c::TypeClass::Unknown: break;
    }
    placeholder = true;
    return "__xl_put(" + buf + ", \"<unrenderable>\", 14);";
  }

  void struct_helper(const std::string& name) {
    if (emitted.contains(name)) return;
    emitted.insert(name);
    const c::StructDef& def = structs.at(name);
    std::string body;
    body += "  __xl_put(b, \"{\", 1);\n";
    for (std::size_t i = 0; i < def.fields.size(); ++i) {
      const auto& f = def.fields[i];
      if (i) body += "  __xl_put(b, \", \", 2);\n";
      const std::string label = f.name + "\\\\=";
      body += "  __xl_put(b, \"" + label + "\", " + std::to_string(f.name.size() + 2) + ");\n";
      const std::string expr = "v->" + f.name;
      if (f.array_len) {
        const c::TypeInfo ti = c::classify(f.type, structs);
        if (ti.pointer_depth == 0 &&
            (ti.base == "char" || ti.base == "signed char" || ti.base == "unsigned char")) {
          body += "  __xl_str(b, (const char *)" + expr + ", sizeof " + expr + " < " +
                  std::to_string(kTraceStringLimit) + " ? sizeof " + expr + " : " +
                  std::to_string(kTraceStringLimit) + ");\n";
        } else {
          body += "  __xl_ptr(b, (const void *)" + expr + ");\n";
        }
        continue;
      }
      // Nested helpers are appended to `pending` before this one.
      body += "  " + render("b", expr, f.type) + "\n";
    }
    body += "  __xl_put(b, \"}\", 1);\n";
    pending += "__attribute__((unused)) static void __xl_render_" + mangle(name) +
               "(struct __xl_buf *b, const " + name + " *v) {\n" + body + "}\n";
  }
};

struct Edit {
  std::size_t offset;
  std::size_t length;
  std::string text;
};

}  // namespace

std::string instrument_source(std::string_view source, const std::set<std::string>& selected,
                              const std::map<std::string, c::StructDef>& structs,
                              InstrumentReport& report) {
  const auto defs = c::find_functions(source);
  const c::Lexed lx = c::lex(source);
  Emitter em{structs, {}, {}, false};
  std::vector<Edit> edits;

  for (const auto& def : defs) {
    if (!selected.contains(def.unit.name)) continue;
    const c::Signature& sig = def.sig;
    if (sig.return_type.find('(') != std::string::npos) {
      report.skipped[sig.name] = "function-pointer return type";
      continue;
    }
    if (std::any_of(sig.params.begin(), sig.params.end(),
                    [](const c::Param& p) { return p.name.empty(); })) {
      report.skipped[sig.name] = "parameter without a name";
      continue;
    }
    if (sig.variadic) {
      report.flagged[sig.name] = "variadic arguments not logged";
    }
    const bool returns_void = c::classify(sig.return_type, structs).cls == c::TypeClass::Void;

    // Per-function record writer, placed just before the definition.
    em.placeholder = false;
    std::string decls;
    std::string args_call;
    std::string body;
    for (std::size_t i = 0; i < sig.params.size(); ++i) {
      const auto& p = sig.params[i];
      if (i) {
        decls += ", ";
        args_call += ", ";
        body += "  __xl_put(&__xl_b, \";\", 1);\n";
      }
      decls += p.decl;
      args_call += p.name;
      body += "  __xl_put(&__xl_b, \"" + p.name + "=\", " + std::to_string(p.name.size() + 1) + ");\n";
      body += "  " + em.render("&__xl_b", p.name, p.type) + "\n";
    }
    body += "  __xl_put(&__xl_b, \" | ret=\", 7);\n";
    if (returns_void) {
      body += "  __xl_put(&__xl_b, \"void\", 4);\n";
    } else {
      if (!decls.empty()) decls += ", ";
      decls += sig.return_type + " __xl_r";
      body += "  " + em.render("&__xl_b", "__xl_r", sig.return_type) + "\n";
    }
    if (decls.empty()) decls = "void";
    if (em.placeholder) report.flagged.emplace(sig.name, "placeholder rendering for some values");

    const std::string tracer = "__xl_trace_" + sig.name;
    std::string helper = em.pending;
    em.pending.clear();
    helper += "__attribute__((unused)) static void " + tracer + "(" + decls + ") {\n" +
              "  static unsigned long __xl_calls;\n" +
              "  FILE *__xl_f = __xl_trace_stream();\n" +
              "  struct __xl_buf __xl_b;\n" +
              "  ++__xl_calls;\n" +
              "  if (!__xl_f) return;\n" +
              "  __xl_b.n = 0;\n" +
              "  __xl_begin(&__xl_b, \"" + sig.name + "\", __xl_calls);\n" + body +
              "  __xl_end(&__xl_b, __xl_f);\n}\n";
    edits.push_back({def.unit.byte_range.start, 0, helper});

    const std::string call_void = tracer + "(" + args_call + ");";
    const std::string call_ret =
        tracer + "(" + args_call + (args_call.empty() ? "" : ", ") + "__xl_ret);";

    // Rewrite every return in the body.
    const auto& t = lx.tokens;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k].begin <= def.body_range.start || t[k].end >= def.body_range.end) continue;
      if (t[k].kind != c::TokKind::Ident || t[k].text != "return") continue;
      int depth = 0;
      std::size_t semi = k + 1;
      for (; semi < t.size(); ++semi) {
        const std::string& x = t[semi].text;
        if (t[semi].kind != c::TokKind::Punct) continue;
        if (x == "(" || x == "[" || x == "{") ++depth;
        else if (x == ")" || x == "]" || x == "}") --depth;
        else if (x == ";" && depth == 0) break;
      }
      const std::size_t from = t[k].begin;
      const std::size_t to = t[semi].end;
      std::string replacement;
      if (semi == k + 1) {
        replacement = "{ " + call_void + " return; }";
      } else {
        const std::string expr(source.substr(t[k + 1].begin, t[semi].begin - t[k + 1].begin));
        if (returns_void) {
          replacement = "{ " + expr + "; " + call_void + " return; }";
        } else {
          replacement = "{ " + sig.return_type + " __xl_ret = (" + expr + "); " + call_ret +
                        " return __xl_ret; }";
        }
      }
      edits.push_back({from, to - from, replacement});
      k = semi;
    }
    // Falling off the end of a void function, or of main (which returns 0).
    const std::size_t closing = def.body_range.end - 1;
    if (returns_void) {
      edits.push_back({closing, 0, "  " + call_void + "\n"});
    } else if (sig.name == "main") {
      edits.push_back({closing, 0,
                       "  { " + sig.return_type + " __xl_ret = 0; " + call_ret + " }\n"});
    }
    report.instrumented.push_back(sig.name);
  }
  if (edits.empty()) return std::string(source);
  edits.insert(edits.begin(), Edit{0, 0, std::string(kPrelude)});

  std::stable_sort(edits.begin(), edits.end(),
                   [](const Edit& a, const Edit& b) { return a.offset < b.offset; });
  std::string out;
  std::size_t pos = 0;
  for (const auto& e : edits) {
    out.append(source.substr(pos, e.offset - pos));
    out += e.text;
    pos = e.offset + e.length;
  }
  out.append(source.substr(pos));
  return out;
}

}  // namespace specbridge
