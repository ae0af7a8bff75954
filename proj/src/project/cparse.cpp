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

#include "specbridge/project/cparse.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace specbridge::c {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::size_t line_of(std::string_view s, std::size_t pos) {
  return 1 + static_cast<std::size_t>(std::count(s.begin(), s.begin() + static_cast<long>(pos), '\n'));
}

// Index of the token matching the opener at `open`, or npos.
std::size_t match_forward(const std::vector<Token>& t, std::size_t open) {
  const std::string& o = t[open].text;
  const std::string c = o == "(" ? ")" : o == "[" ? "]" : "}";
  int depth = 0;
  for (std::size_t i = open; i < t.size(); ++i) {
    if (t[i].kind != TokKind::Punct) continue;
    if (t[i].text == o) ++depth;
    else if (t[i].text == c && --depth == 0) return i;
  }
  return std::string::npos;
}

std::size_t match_backward(const std::vector<Token>& t, std::size_t close) {
  const std::string& c = t[close].text;
  const std::string o = c == ")" ? "(" : c == "]" ? "[" : "{";
  int depth = 0;
  for (std::size_t i = close + 1; i-- > 0;) {
    if (t[i].kind != TokKind::Punct) continue;
    if (t[i].text == c) ++depth;
    else if (t[i].text == o && --depth == 0) return i;
  }
  return std::string::npos;
}

bool is_punct(const Token& t, std::string_view p) { return t.kind == TokKind::Punct && t.text == p; }

const std::set<std::string, std::less<>>& builtin_type_words() {
  static const std::set<std::string, std::less<>> words = {
      "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned",
      "_Bool", "const", "volatile", "restrict", "struct", "union", "enum"};
  return words;
}

std::string join_tokens(const std::vector<Token>& t, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ' ';
    out += t[i].text;
  }
  return out;
}

Param parse_param(std::string_view text, const std::vector<Token>& toks) {
  Param p;
  p.decl = std::string(trim(text));
  // Function pointer: type (*name)(args).
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    if (is_punct(toks[i], "(") && is_punct(toks[i + 1], "*") &&
        toks[i + 2].kind == TokKind::Ident) {
      p.name = toks[i + 2].text;
      p.type = p.decl;  // left unrenderable on purpose
      p.type.replace(toks[i + 2].begin - toks.front().begin, toks[i + 2].text.size(), "");
      p.type += " (fnptr)";
      return p;
    }
  }
  std::size_t name_idx = std::string::npos;
  std::size_t end = toks.size();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (is_punct(toks[i], "[")) {
      p.array = true;
      end = i;
      break;
    }
  }
  if (end >= 2 && toks[end - 1].kind == TokKind::Ident &&
      !builtin_type_words().contains(toks[end - 1].text)) {
    const std::string& prev = toks[end - 2].text;
    if (prev != "struct" && prev != "union" && prev != "enum") name_idx = end - 1;
  }
  std::string type;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i == name_idx || (p.array && i >= end)) continue;
    if (!type.empty() && toks[i].text != "*") type += ' ';
    if (!type.empty() && toks[i].text == "*" && type.back() != '*') type += ' ';
    type += toks[i].text;
  }
  if (p.array) type += type.empty() || type.back() == '*' ? "*" : " *";
  if (name_idx != std::string::npos) p.name = toks[name_idx].text;
  p.type = type;
  return p;
}

}  // namespace

bool is_keyword(std::string_view w) {
  static const std::set<std::string, std::less<>> kw = {
      "auto",     "break",   "case",     "char",   "const",    "continue", "default",
      "do",       "double",  "else",     "enum",   "extern",   "float",    "for",
      "goto",     "if",      "inline",   "int",    "long",     "register", "restrict",
      "return",   "short",   "signed",   "sizeof", "static",   "struct",   "switch",
      "typedef",  "union",   "unsigned", "void",   "volatile", "while",    "_Bool",
      "_Alignof", "_Static_assert", "__attribute__", "__typeof__", "typeof", "_Generic",
      "__asm__",  "asm",     "defined"};
  return kw.contains(w);
}

Lexed lex(std::string_view s) {
  Lexed out;
  std::size_t i = 0;
  bool line_start = true;
  auto fail = [&](std::size_t at, const char* what) {
    throw FormatError(std::string(what) + " at line " + std::to_string(line_of(s, at)));
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      const std::size_t e = s.find('\n', i);
      const std::size_t end = e == std::string_view::npos ? s.size() : e;
      out.comments.push_back({i, end, std::string(s.substr(i, end - i))});
      i = end;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const std::size_t e = s.find("*/", i + 2);
      if (e == std::string_view::npos) fail(i, "unterminated comment");
      out.comments.push_back({i, e + 2, std::string(s.substr(i, e + 2 - i))});
      i = e + 2;
      continue;
    }
    if (c == '#' && line_start) {
      std::size_t j = i;
      while (j < s.size()) {
        if (s[j] == '\n' && (j == 0 || s[j - 1] != '\\')) break;
        // Block comments may span lines inside a directive.
        if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '*') {
          const std::size_t e = s.find("*/", j + 2);
          if (e == std::string_view::npos) fail(j, "unterminated comment");
          j = e + 2;
          continue;
        }
        ++j;
      }
      out.directives.push_back({i, j});
      i = j;
      continue;
    }
    line_start = false;
    Token t;
    t.begin = i;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = TokKind::Ident;
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i + 1;
      while (j < s.size() && (ident_char(s[j]) || s[j] == '.' ||
                              ((s[j] == '+' || s[j] == '-') &&
                               (s[j - 1] == 'e' || s[j - 1] == 'E' || s[j - 1] == 'p' ||
                                s[j - 1] == 'P')))) {
        ++j;
      }
      t.kind = TokKind::Number;
      i = j;
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != c) {
        if (s[j] == '\\') ++j;
        else if (s[j] == '\n') fail(i, "unterminated literal");
        ++j;
      }
      if (j >= s.size()) fail(i, "unterminated literal");
      t.kind = c == '"' ? TokKind::String : TokKind::Char;
      i = j + 1;
    } else {
      static const std::vector<std::string_view> multi = {
          "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&",
          "||",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "##"};
      t.kind = TokKind::Punct;
      std::size_t len = 1;
      for (auto m : multi) {
        if (s.substr(i, m.size()) == m) {
          len = m.size();
          break;
        }
      }
      i += len;
    }
    t.end = i;
    t.text = std::string(s.substr(t.begin, t.end - t.begin));
    out.tokens.push_back(std::move(t));
  }
  return out;
}

std::string clean_comment(std::string_view raw) {
  std::string_view body = raw;
  if (body.substr(0, 2) == "//") {
    body.remove_prefix(2);
  } else if (body.substr(0, 2) == "/*") {
    body.remove_prefix(2);
    if (body.size() >= 2 && body.substr(body.size() - 2) == "*/") body.remove_suffix(2);
  }
  std::vector<std::string> lines;
  for (auto line : split_lines(body)) {
    line = trim(line);
    while (!line.empty() && line.front() == '*') line = trim(line.substr(1));
    if (line.substr(0, 2) == "//") line = trim(line.substr(2));
    lines.emplace_back(line);
  }
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return join(lines, "\n");
}

Signature parse_signature(std::string_view text) {
  const Lexed lx = lex(text);
  const auto& t = lx.tokens;
  if (t.empty() || !is_punct(t.back(), ")")) throw FormatError("not a function signature: " + std::string(text));
  const std::size_t open = match_backward(t, t.size() - 1);
  if (open == std::string::npos || open == 0 || t[open - 1].kind != TokKind::Ident) {
    throw FormatError("not a function signature: " + std::string(text));
  }
  Signature sig;
  sig.name = t[open - 1].text;
  std::vector<Token> ret;
  for (std::size_t i = 0; i + 1 < open; ++i) {
    const std::string& w = t[i].text;
    if (w == "static") {
      sig.is_static = true;
      continue;
    }
    if (w == "inline" || w == "extern" || w == "__inline" || w == "__inline__") continue;
    ret.push_back(t[i]);
  }
  // K&R implicit int: "main(n)".
  sig.return_type = ret.empty() ? "int" : join_tokens(ret, 0, ret.size());

  std::size_t start = open + 1;
  int depth = 0;
  for (std::size_t i = open + 1; i < t.size(); ++i) {
    const bool last = i == t.size() - 1;
    if (is_punct(t[i], "(") || is_punct(t[i], "[")) ++depth;
    if ((is_punct(t[i], ")") || is_punct(t[i], "]")) && !last) --depth;
    if ((depth == 0 && is_punct(t[i], ",")) || last) {
      if (i > start) {
        std::vector<Token> piece(t.begin() + static_cast<long>(start), t.begin() + static_cast<long>(i));
        if (piece.size() == 1 && piece[0].text == "...") {
          sig.variadic = true;
        } else if (!(piece.size() == 1 && piece[0].text == "void" && sig.params.empty() && last)) {
          const auto from = piece.front().begin;
          const auto to = piece.back().end;
          sig.params.push_back(parse_param(text.substr(from, to - from), piece));
        }
      }
      start = i + 1;
    }
  }
  return sig;
}

std::vector<FunctionDef> find_functions(std::string_view source, const std::string& file) {
  const Lexed lx = lex(source);
  const auto& t = lx.tokens;
  std::vector<FunctionDef> defs;

  auto directive_between = [&](std::size_t from, std::size_t to) {
    return std::any_of(lx.directives.begin(), lx.directives.end(),
                       [&](const ByteRange& d) { return d.start >= from && d.end <= to; });
  };

  std::size_t stmt = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && directive_between(t[i - 1].end, t[i].begin)) stmt = i;
    if (is_punct(t[i], ";")) {
      stmt = i + 1;
      continue;
    }
    if (!is_punct(t[i], "{")) continue;
    const std::size_t close = match_forward(t, i);
    if (close == std::string::npos) {
      throw FormatError((file.empty() ? std::string("source") : file) + ":" +
                        std::to_string(line_of(source, t[i].begin)) + ": unbalanced brace");
    }
    bool is_function = false;
    std::size_t open = std::string::npos;
    if (i > 0 && is_punct(t[i - 1], ")")) {
      open = match_backward(t, i - 1);
      is_function = open != std::string::npos && open > 0 && open >= stmt &&
                    t[open - 1].kind == TokKind::Ident && !is_keyword(t[open - 1].text);
      for (std::size_t k = stmt; is_function && k < open; ++k) {
        if (is_punct(t[k], "=") || is_punct(t[k], "(")) is_function = false;
      }
    }
    if (!is_function) {
      // Struct bodies and initializers: the statement runs on to its ';'.
      i = close;
      continue;
    }

    FunctionDef def;
    const std::size_t sig_begin = t[stmt].begin;
    def.unit.name = t[open - 1].text;
    def.unit.signature = std::string(source.substr(sig_begin, t[i - 1].end - sig_begin));
    def.unit.body = std::string(source.substr(t[i].begin, t[close].end - t[i].begin));
    def.unit.byte_range = {sig_begin, t[close].end};
    def.unit.file = file;
    def.body_range = {t[i].begin, t[close].end};
    def.line = line_of(source, sig_begin);
    def.sig = parse_signature(def.unit.signature);

    // Docstring: a comment separated from the signature by whitespace only.
    for (auto it = lx.comments.rbegin(); it != lx.comments.rend(); ++it) {
      if (it->end > sig_begin) continue;
      if (trim(source.substr(it->end, sig_begin - it->end)).empty()) {
        // Adjacent // lines form one block.
        std::size_t first = static_cast<std::size_t>(lx.comments.rend() - it - 1);
        std::string raw = it->text;
        if (raw.substr(0, 2) == "//") {
          while (first > 0 && lx.comments[first - 1].text.substr(0, 2) == "//" &&
                 trim(source.substr(lx.comments[first - 1].end,
                                    lx.comments[first].begin - lx.comments[first - 1].end))
                     .empty()) {
            --first;
          }
          raw = std::string(source.substr(lx.comments[first].begin, it->end - lx.comments[first].begin));
        }
        std::string doc = clean_comment(raw);
        if (!doc.empty()) def.unit.docstring = std::move(doc);
      }
      break;
    }

    for (std::size_t k = i + 1; k < close; ++k) {
      if (t[k].kind == TokKind::Ident && k + 1 < close && is_punct(t[k + 1], "(") &&
          !is_keyword(t[k].text) && !is_punct(t[k - 1], ".") && !is_punct(t[k - 1], "->")) {
        def.unit.callees.insert(t[k].text);
      }
    }
    defs.push_back(std::move(def));
    i = close;
    stmt = close + 1;
  }
  return defs;
}

std::map<std::string, StructDef> find_structs(std::string_view source) {
  const Lexed lx = lex(source);
  const auto& t = lx.tokens;
  std::map<std::string, StructDef> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].text != "struct" || t[i].kind != TokKind::Ident) continue;
    const bool typedef_ = i > 0 && t[i - 1].text == "typedef";
    std::size_t j = i + 1;
    std::string tag;
    if (j < t.size() && t[j].kind == TokKind::Ident) tag = t[j++].text;
    if (j >= t.size() || !is_punct(t[j], "{")) continue;
    const std::size_t close = match_forward(t, j);
    if (close == std::string::npos) break;

    StructDef def;
    std::size_t start = j + 1;
    for (std::size_t k = j + 1; k < close; ++k) {
      if (is_punct(t[k], "{")) {
        def.renderable = false;
        k = match_forward(t, k);
        continue;
      }
      if (!is_punct(t[k], ";")) continue;
      std::vector<Token> decl(t.begin() + static_cast<long>(start), t.begin() + static_cast<long>(k));
      start = k + 1;
      if (decl.empty()) continue;
      if (std::any_of(decl.begin(), decl.end(), [](const Token& x) { return is_punct(x, "(") || is_punct(x, "{"); })) {
        def.renderable = false;
        continue;
      }
      // Drop bitfield widths.
      std::vector<std::vector<Token>> pieces(1);
      for (std::size_t q = 0; q < decl.size(); ++q) {
        if (is_punct(decl[q], ":")) {
          while (q + 1 < decl.size() && !is_punct(decl[q + 1], ",")) ++q;
          continue;
        }
        if (is_punct(decl[q], ",")) pieces.emplace_back();
        else pieces.back().push_back(decl[q]);
      }
      std::string base;
      for (std::size_t p = 0; p < pieces.size(); ++p) {
        auto& piece = pieces[p];
        std::optional<std::string> array_len;
        auto lb = std::find_if(piece.begin(), piece.end(), [](const Token& x) { return is_punct(x, "["); });
        if (lb != piece.end()) {
          std::string len;
          for (auto it = lb + 1; it != piece.end() && !is_punct(*it, "]"); ++it) len += it->text;
          array_len = len;
          piece.erase(lb, piece.end());
        }
        if (piece.empty() || piece.back().kind != TokKind::Ident) {
          def.renderable = false;
          continue;
        }
        const std::string name = piece.back().text;
        piece.pop_back();
        int stars = 0;
        std::vector<Token> type_toks;
        for (const auto& x : piece) {
          if (is_punct(x, "*")) ++stars;
          else type_toks.push_back(x);
        }
        if (p == 0) base = join_tokens(type_toks, 0, type_toks.size());
        std::string type = base;
        if (stars) type += " " + std::string(static_cast<std::size_t>(stars), '*');
        def.fields.push_back({type, name, array_len});
      }
    }
    if (!tag.empty()) {
      def.tag = "struct " + tag;
      out[def.tag] = def;
    }
    if (typedef_ && close + 2 < t.size() && t[close + 1].kind == TokKind::Ident &&
        is_punct(t[close + 2], ";")) {
      StructDef alias = def;
      alias.tag = t[close + 1].text;
      out[alias.tag] = alias;
    }
    i = close;
  }
  return out;
}

TypeInfo classify(std::string_view type, const std::map<std::string, StructDef>& structs) {
  TypeInfo info;
  if (type.find('(') != std::string_view::npos) return info;
  const Lexed lx = lex(type);
  bool saw_star = false;
  bool is_struct_kw = false;
  std::vector<std::string> words;
  for (const auto& tok : lx.tokens) {
    if (tok.text == "*") {
      ++info.pointer_depth;
      saw_star = true;
    } else if (tok.text == "const") {
      if (!saw_star) info.pointee_const = true;
    } else if (tok.text == "volatile" || tok.text == "restrict" || tok.text == "__restrict") {
    } else if (tok.text == "struct" || tok.text == "union" || tok.text == "enum") {
      is_struct_kw = tok.text == "struct";
      if (tok.text == "enum") words.push_back("enum");
    } else if (tok.kind == TokKind::Ident) {
      words.push_back(tok.text);
    } else {
      return info;
    }
  }
  info.base = join(words, " ");
  const std::string& b = info.base;
  if (info.pointer_depth > 0) {
    if (info.pointer_depth == 1 &&
        (b == "char" || b == "signed char" || b == "unsigned char")) {
      info.cls = TypeClass::CharPtr;
    } else {
      info.cls = TypeClass::Pointer;
    }
    return info;
  }
  static const std::set<std::string, std::less<>> signed_ints = {
      "char", "signed char", "short", "short int", "signed short", "int", "signed", "signed int",
      "long", "long int", "signed long", "long long", "long long int", "signed long long",
      "ssize_t", "ptrdiff_t", "intptr_t", "intmax_t", "off_t", "pid_t", "int8_t", "int16_t",
      "int32_t", "int64_t", "_Bool", "bool"};
  static const std::set<std::string, std::less<>> unsigned_ints = {
      "unsigned char", "unsigned short", "unsigned short int", "unsigned", "unsigned int",
      "unsigned long", "unsigned long int", "unsigned long long", "unsigned long long int",
      "size_t", "uintptr_t", "uintmax_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t",
      "mode_t", "uid_t", "gid_t"};
  if (b == "void") info.cls = TypeClass::Void;
  else if (b == "float" || b == "double" || b == "long double") info.cls = TypeClass::Floating;
  else if (signed_ints.contains(b) || b.rfind("enum ", 0) == 0) info.cls = TypeClass::SignedInt;
  else if (unsigned_ints.contains(b)) info.cls = TypeClass::UnsignedInt;
  else if (structs.contains(is_struct_kw ? "struct " + b : b)) {
    info.cls = TypeClass::Struct;
    if (is_struct_kw) info.base = "struct " + b;
  }
  return info;
}

}  // namespace specbridge::c
