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

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specbridge/project/cparse.h"

namespace specbridge {

struct InstrumentReport {
  std::vector<std::string> instrumented;
  // Functions whose parameters or return value render as placeholders.
  std::map<std::string, std::string> flagged;
  // Functions left alone (unnamed/K&R parameters, function-pointer returns).
  std::map<std::string, std::string> skipped;
};

// Rewrites one C file so that every selected function appends a trace record
// (see trace.h) just before each return and at the end of a void body.
std::string instrument_source(std::string_view source, const std::set<std::string>& selected,
                              const std::map<std::string, c::StructDef>& structs,
                              InstrumentReport& report);

}  // namespace specbridge
