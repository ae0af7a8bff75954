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

#include "specbridge/project/trace.h"

#include <map>

#include "specbridge/core/errors.h"
#include "specbridge/core/text.h"

namespace specbridge {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Splits on `sep` where it is not escaped.
std::vector<std::string_view> split_unescaped(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
      continue;
    }
    if (s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

std::size_t find_unescaped(std::string_view s, char c) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\') ++i;
    else if (s[i] == c) return i;
  }
  return std::string_view::npos;
}

}  // namespace

std::string escape_trace_value(std::string_view raw) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '\\' || c == '|' || c == ';' || c == '=') {
      out += '\\';
      out += ch;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c < 0x20 || c >= 0x7f) {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    } else {
      out += ch;
    }
  }
  return out;
}

std::string unescape_trace_value(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) throw FormatError("dangling escape in trace value");
    switch (s[i]) {
      case 'n': out += '\n'; break;
      case 'x': {
        const int hi = i + 1 < s.size() ? hex_value(s[i + 1]) : -1;
        const int lo = i + 2 < s.size() ? hex_value(s[i + 2]) : -1;
        if (hi < 0 || lo < 0) throw FormatError("bad \\x escape in trace value");
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        break;
      }
      case '\\':
      case '|':
      case ';':
      case '=': out += s[i]; break;
      default: throw FormatError(std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

bool value_comparable(std::string_view v) {
  return v.find("ptr(") == std::string_view::npos &&
         v.find("<unrenderable>") == std::string_view::npos;
}

bool IoTracePair::comparable() const {
  if (!value_comparable(return_value)) return false;
  for (const auto& a : args) {
    if (!value_comparable(a.value)) return false;
  }
  return true;
}

std::string format_trace_record(const IoTracePair& p) {
  std::string out = p.function + " | " + std::to_string(p.call_index) + " | ";
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    if (i) out += ';';
    out += p.args[i].name + "=" + escape_trace_value(p.args[i].value);
  }
  out += " | ret=" + escape_trace_value(p.return_value);
  return out;
}

IoTracePair parse_trace_record(std::string_view line) {
  const auto fields = split_unescaped(line, '|');
  if (fields.size() != 4) {
    throw FormatError("trace record needs 4 fields: " + std::string(line));
  }
  // Fields are joined by " | "; strip exactly that padding.
  auto field = [&](std::size_t i) {
    std::string_view f = fields[i];
    if (i > 0) {
      if (f.empty() || f.front() != ' ') throw FormatError("malformed trace record: " + std::string(line));
      f.remove_prefix(1);
    }
    if (i + 1 < fields.size()) {
      if (f.empty() || f.back() != ' ') throw FormatError("malformed trace record: " + std::string(line));
      f.remove_suffix(1);
    }
    return f;
  };
  IoTracePair p;
  p.function = std::string(field(0));
  if (p.function.empty()) throw FormatError("trace record without function name");
  try {
    std::size_t used = 0;
    p.call_index = std::stoi(std::string(field(1)), &used);
    if (used != field(1).size()) throw FormatError("bad call index");
  } catch (const std::logic_error&) {
    throw FormatError("bad call index in trace record: " + std::string(line));
  }
  const std::string_view args = field(2);
  if (!args.empty()) {
    for (auto a : split_unescaped(args, ';')) {
      const auto eq = find_unescaped(a, '=');
      if (eq == std::string_view::npos) throw FormatError("trace argument without '=': " + std::string(a));
      p.args.push_back({std::string(a.substr(0, eq)), unescape_trace_value(a.substr(eq + 1))});
    }
  }
  const std::string_view ret = field(3);
  if (ret.substr(0, 4) != "ret=") throw FormatError("trace record without ret=: " + std::string(line));
  p.return_value = unescape_trace_value(ret.substr(4));
  return p;
}

std::vector<IoTracePair> parse_trace_log(std::string_view text) {
  std::vector<IoTracePair> out;
  std::size_t lineno = 0;
  for (auto line : split_lines(text)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view h = trim(line.substr(1));
      if (h.substr(0, 16) == "specbridge-trace") {
        const std::string want = "specbridge-trace v" + std::to_string(kTraceSchemaVersion);
        if (h != want) throw FormatError("unsupported trace schema: " + std::string(h));
      }
      continue;
    }
    try {
      out.push_back(parse_trace_record(line));
    } catch (const FormatError& e) {
      throw FormatError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

IoPair to_io_pair(const IoTracePair& p) {
  std::vector<std::string> parts;
  for (const auto& a : p.args) parts.push_back(a.name + "=" + a.value);
  return IoPair{parts.empty() ? std::string("()") : join(parts, ", "), p.return_value,
                IoOrigin::Traced, p.comparable()};
}

std::vector<IoTracePair> sample_evenly(const std::vector<IoTracePair>& records, std::size_t cap) {
  if (records.size() <= cap) return records;
  // Group positions by test, in first-seen order.
  std::vector<std::string> tests;
  std::map<std::string, std::vector<std::size_t>> by_test;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& v = by_test[records[i].test_id];
    if (v.empty()) tests.push_back(records[i].test_id);
    v.push_back(i);
  }
  std::map<std::string, std::size_t> quota;
  std::size_t assigned = 0;
  while (assigned < cap) {
    for (const auto& t : tests) {
      if (assigned == cap) break;
      if (quota[t] < by_test[t].size()) {
        ++quota[t];
        ++assigned;
      }
    }
  }
  std::vector<bool> keep(records.size(), false);
  for (const auto& t : tests) {
    const auto& idx = by_test[t];
    const std::size_t q = quota[t];
    for (std::size_t j = 0; j < q; ++j) keep[idx[j * idx.size() / q]] = true;
  }
  std::vector<IoTracePair> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

}  // namespace specbridge
