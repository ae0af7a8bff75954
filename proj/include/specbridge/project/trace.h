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

// Trace log format (schema v1), one record per line:
//
//   # specbridge-trace v1
//   <fn> | <call-index> | <name>=<value>;<name>=<value> | ret=<value>
//
// Values escape '\\', '|', ';', '=' as "\\<c>", newline as "\\n" and other
// control or non-ASCII bytes as "\\xHH". The fields are joined by exactly
// " | ". Lines starting with '#' are headers or comments; every header must
// name version 1.
//
// Rendered values: integers in decimal, floating point with %.17g, char
// pointers as a quoted string of at most 100 bytes, other pointers as
// ptr(0x...) (not comparable), NULL as NULL, by-value structs as
// {field=value, ...}, anything else as <unrenderable>. Arguments are
// rendered at function exit.

#include <string>
#include <string_view>
#include <vector>

#include "specbridge/core/model.h"

namespace specbridge {

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr std::size_t kTraceStringLimit = 100;
inline constexpr const char* kTraceFileEnv = "SPECBRIDGE_TRACE_FILE";

struct TraceArg {
  std::string name;
  std::string value;
  friend bool operator==(const TraceArg&, const TraceArg&) = default;
};

struct IoTracePair {
  std::string function;
  int call_index = 0;
  std::vector<TraceArg> args;
  std::string return_value;
  std::string test_id;  // filled by the collector, not part of the record

  bool comparable() const;
  friend bool operator==(const IoTracePair&, const IoTracePair&) = default;
};

std::string escape_trace_value(std::string_view raw);
std::string unescape_trace_value(std::string_view escaped);
bool value_comparable(std::string_view value);

std::string format_trace_record(const IoTracePair& pair);
// Throws FormatError.
IoTracePair parse_trace_record(std::string_view line);
std::vector<IoTracePair> parse_trace_log(std::string_view text);

// "a=1, s=\"x\"" and the return value as an IoPair of origin Traced.
IoPair to_io_pair(const IoTracePair& pair);

// Keeps at most `cap` records, sharing the slots round-robin across tests and
// spacing the picks evenly within each test. Input order is preserved.
std::vector<IoTracePair> sample_evenly(const std::vector<IoTracePair>& records, std::size_t cap);

}  // namespace specbridge
