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
#include <string>
#include <vector>

#include "json.hpp"
#include "specbridge/cli/store.h"
#include "specbridge/core/model.h"
#include "specbridge/translate/translate.h"

namespace specbridge {

// Recomputed from the stored stage records; never read from a cache.
PassAtKReport report_for(const StoredRun& run);

// Copies baseline counts into `treated` and fills improvement_tenths where
// the baseline count is positive.
PassAtKReport with_baseline(PassAtKReport treated, const PassAtKReport& baseline);

// "11%", "-0.3%", or "n/a" when the baseline count is zero.
std::string improvement_cell(int baseline, int treated);

// Absolute pass@1..k columns, then improvement columns against `baseline`
// when given. Text is a fixed-width table; JSON carries schema/version.
std::string report_text(const StoredRun& treated, const StoredRun* baseline);
nlohmann::json report_json(const StoredRun& treated, const StoredRun* baseline);

struct SpecgenTally {
  int total = 0;
  std::map<Modality, int> found;
  std::map<Modality, int> patched;  // included in found
  int incomplete = 0;
};
// found/total as a percentage with one decimal, "63.0%"; "n/a" for total 0.
std::string share_cell(int found, int total);
std::string tally_text(const SpecgenTally& t, const std::vector<Modality>& modalities);
nlohmann::json tally_json(const SpecgenTally& t, const std::vector<Modality>& modalities);

VennRegions attribution_for(const StoredRun& run);
// Region names: none_only, static, io, desc, static+io, static+desc, io+desc,
// static+io+desc.
std::string region_name(std::size_t mask);
std::string attribution_text(const VennRegions& v, int programs);
nlohmann::json attribution_json(const VennRegions& v, int programs);

}  // namespace specbridge
