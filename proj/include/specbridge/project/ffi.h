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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "specbridge/project/cparse.h"

namespace specbridge {

// Rust spelling of a C type for an extern "C" boundary, or nullopt when the
// type cannot cross it (by-value structs, function pointers, unknown names).
// Opaque pointees (FILE, undeclared structs) become c_void.
std::optional<std::string> rust_ffi_type(std::string_view c_type);

struct FfiGlue {
  bool ok = false;
  std::string skip_reason;
  // `#[no_mangle] pub unsafe extern "C" fn name(...) -> T` (no body).
  std::string target_export;
  // extern "C" block for callees that stay in C.
  std::string extern_decls;
  // use-lines for callees already translated (accumulated runs).
  std::string peer_uses;
  // JSON description of the mixed build (crate type, link inputs, symbols).
  std::string binding_config;
  std::vector<std::string> c_callees;  // in-project callees still in C
};

// `functions` indexes every unit of the project by name; `translated` names
// functions whose Rust versions are already linked in.
FfiGlue generate_ffi_glue(const c::FunctionDef& def,
                          const std::map<std::string, c::FunctionDef>& functions,
                          const std::set<std::string>& translated);

// Module wrapping one translated function inside the staticlib crate.
std::string rust_module(const std::string& function, const FfiGlue& glue,
                        std::string_view translation);
std::string rust_crate(const std::vector<std::string>& modules);

// Removes `static` / `inline` from the declarations and definitions of
// `names` so they get external linkage across the language boundary.
std::string strip_internal_linkage(std::string_view source, const std::set<std::string>& names);

// Replaces a definition with its prototype (external linkage).
std::string definition_to_prototype(std::string_view source, const c::FunctionDef& def);

}  // namespace specbridge
