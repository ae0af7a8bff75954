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

#include "specbridge/cli/report.h"

#include <algorithm>

#include "specbridge/core/errors.h"

namespace specbridge {

using nlohmann::json;

namespace {

constexpr const char* kReportSchema = "specbridge.report";

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string rpad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

}  // namespace

PassAtKReport report_for(const StoredRun& run) { return compute_pass_at_k(run.results, run.k_max); }

PassAtKReport with_baseline(PassAtKReport treated, const PassAtKReport& baseline) {
  for (auto& row : treated.rows) {
    if (row.k < 1 || static_cast<std::size_t>(row.k) > baseline.rows.size()) continue;
    const int b = baseline.correct_at(row.k);
    row.baseline_count = b;
    if (b > 0) row.improvement_tenths = improvement_percent(b, row.correct_count).tenths();
  }
  return treated;
}

std::string improvement_cell(int baseline, int treated) {
  if (baseline <= 0) return "n/a";
  return improvement_percent(baseline, treated).formatted();
}

json report_json(const StoredRun& treated, const StoredRun* baseline) {
  PassAtKReport t = report_for(treated);
  json j = {{"schema", kReportSchema},
            {"version", kStoreVersion},
            {"run_id", treated.run_id},
            {"mode", treated.mode},
            {"k_max", treated.k_max}};
  json notes = json::array();
  if (baseline) {
    const PassAtKReport b = report_for(*baseline);
    t = with_baseline(std::move(t), b);
    j["baseline_run_id"] = baseline->run_id;
    j["baseline_mode"] = baseline->mode;
    json imp = json::array();
    for (const auto& row : t.rows) {
      imp.push_back(row.baseline_count ? json(improvement_cell(*row.baseline_count, row.correct_count))
                                       : json(nullptr));
    }
    j["improvement"] = imp;
    if (b.total != t.total) {
      notes.push_back("runs cover different totals (" + std::to_string(b.total) + " vs " +
                      std::to_string(t.total) + ")");
    }
  } else {
    j["baseline_run_id"] = nullptr;
  }
  if (t.excluded_incomplete > 0) {
    notes.push_back(std::to_string(t.excluded_incomplete) +
                    " incomplete program(s) excluded from the denominator");
  }
  j["report"] = to_json(t);
  j["notes"] = notes;
  return j;
}

std::string report_text(const StoredRun& treated, const StoredRun* baseline) {
  const json j = report_json(treated, baseline);
  const PassAtKReport t = report_from_json(j.at("report"));
  const int k = treated.k_max;
  std::size_t w = 28;
  w = std::max(w, treated.run_id.size() + 2);
  if (baseline) w = std::max(w, baseline->run_id.size() + 2);
  std::size_t mw = 16;
  mw = std::max(mw, treated.mode.size() + 2);
  if (baseline) mw = std::max(mw, baseline->mode.size() + 2);
  std::string header = pad("run", w) + pad("mode", mw) + rpad("total", 6);
  for (int i = 1; i <= k; ++i) header += rpad("pass@" + std::to_string(i), 9);
  if (baseline) {
    for (int i = 1; i <= k; ++i) header += rpad("impr@" + std::to_string(i), 9);
  }
  std::string out = header + "\n";
  auto line = [&](const std::string& id, const std::string& mode, const PassAtKReport& r,
                  bool with_impr) {
    std::string l = pad(id, w) + pad(mode, mw) + rpad(std::to_string(r.total), 6);
    for (int i = 1; i <= k; ++i) l += rpad(std::to_string(r.correct_at(i)), 9);
    if (with_impr) {
      for (int i = 1; i <= k; ++i) {
        const auto& cell = j.at("improvement").at(static_cast<std::size_t>(i - 1));
        l += rpad(cell.is_null() ? "-" : cell.get<std::string>(), 9);
      }
    }
    return l + "\n";
  };
  if (baseline) out += line(baseline->run_id, baseline->mode, report_for(*baseline), false);
  out += line(treated.run_id, treated.mode, t, baseline != nullptr);
  for (const auto& n : j.at("notes")) out += "note: " + n.get<std::string>() + "\n";
  return out;
}

std::string share_cell(int found, int total) {
  if (total <= 0) return "n/a";
  const std::int64_t tenths = div_round_half_away(std::int64_t{found} * 1000, total);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

std::string tally_text(const SpecgenTally& t, const std::vector<Modality>& modalities) {
  std::string out = pad("modality", 10) + rpad("found", 7) + rpad("share", 8) + rpad("patched", 9) +
                    rpad("total", 7) + "\n";
  for (Modality m : modalities) {
    const auto f = t.found.count(m) ? t.found.at(m) : 0;
    const auto p = t.patched.count(m) ? t.patched.at(m) : 0;
    out += pad(std::string(to_string(m)), 10) + rpad(std::to_string(f), 7) +
           rpad(share_cell(f, t.total), 8) + rpad(std::to_string(p), 9) + rpad(std::to_string(t.total), 7) + "\n";
  }
  if (t.incomplete) out += "note: " + std::to_string(t.incomplete) + " program(s) incomplete\n";
  return out;
}

json tally_json(const SpecgenTally& t, const std::vector<Modality>& modalities) {
  json rows = json::object();
  for (Modality m : modalities) {
    const int f = t.found.count(m) ? t.found.at(m) : 0;
    rows[std::string(to_string(m))] = {{"found", f},
                                       {"share", share_cell(f, t.total)},
                                       {"patched", t.patched.count(m) ? t.patched.at(m) : 0}};
  }
  return {{"schema", "specbridge.specgen-tally"},
          {"version", kStoreVersion},
          {"total", t.total},
          {"incomplete", t.incomplete},
          {"modalities", rows}};
}

VennRegions attribution_for(const StoredRun& run) {
  std::vector<Attribution> attrs;
  for (const auto& r : run.results) {
    if (r.complete) attrs.push_back(attribute(r));
  }
  return partition(attrs);
}

std::string region_name(std::size_t mask) {
  static const char* names[8] = {"none_only",   "static",      "io",      "static+io",
                                 "desc",        "static+desc", "io+desc", "static+io+desc"};
  if (mask >= 8) throw ContractViolation("region mask out of range");
  return names[mask];
}

std::string attribution_text(const VennRegions& v, int programs) {
  std::string out = pad("region", 18) + rpad("programs", 9) + "\n";
  for (std::size_t m = 1; m < 8; ++m) out += pad(region_name(m), 18) + rpad(std::to_string(v.regions[m]), 9) + "\n";
  out += pad(region_name(0), 18) + rpad(std::to_string(v.regions[0]), 9) + "\n";
  out += pad("solved", 18) + rpad(std::to_string(v.total_solved()), 9) + "\n";
  out += pad("programs", 18) + rpad(std::to_string(programs), 9) + "\n";
  return out;
}

json attribution_json(const VennRegions& v, int programs) {
  json regions = json::object();
  for (std::size_t m = 0; m < 8; ++m) regions[region_name(m)] = v.regions[m];
  return {{"schema", "specbridge.attribution"},
          {"version", kStoreVersion},
          {"regions", regions},
          {"solved", v.total_solved()},
          {"programs", programs}};
}

}  // namespace specbridge
