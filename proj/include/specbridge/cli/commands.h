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

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "specbridge/cli/config.h"
#include "specbridge/cli/store.h"
#include "specbridge/provider/prompts.h"
#include "specbridge/provider/provider.h"
#include "specbridge/sandbox/sandbox.h"

namespace specbridge {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitEnvironment = 2, kExitIncomplete = 3 };

// Lazily built collaborators of one invocation. Every provider call goes
// through a RecordingProvider so runs can list the exchanges they made.
class App {
 public:
  explicit App(AppConfig config);
  ~App();

  const AppConfig& config() const { return config_; }
  Provider& provider();
  RecordingProvider& recorder();
  const PromptComposer& composer();
  Sandbox& sandbox();
  SpecStore& specs();
  RunStore& runs();

 private:
  AppConfig config_;
  std::unique_ptr<Provider> inner_;
  std::unique_ptr<RecordingProvider> recorder_;
  std::unique_ptr<PromptComposer> composer_;
  std::unique_ptr<Sandbox> sandbox_;
  std::unique_ptr<SpecStore> specs_;
  std::unique_ptr<RunStore> runs_;
};

struct GenSpecsArgs {
  std::filesystem::path corpus;
  std::vector<Modality> modalities{Modality::Static, Modality::IO, Modality::Desc};
  bool json = false;
};
int cmd_gen_specs(App& app, const GenSpecsArgs& args, std::ostream& out);

int cmd_validate(App& app, const std::filesystem::path& corpus, std::ostream& out);

struct TranslateArgs {
  std::filesystem::path corpus;
  std::string run_id;  // empty: generated
  std::string baseline_run;
  bool json = false;
};
// Prints the run id on the first line.
int cmd_translate(App& app, const TranslateArgs& args, std::ostream& out);

struct ProjectArgs {
  std::filesystem::path manifest;
  std::string run_id;
  bool json = false;
};
int cmd_project(App& app, const ProjectArgs& args, std::ostream& out);

int cmd_report(App& app, const std::string& run_id, const std::string& baseline, bool json,
               std::ostream& out);
int cmd_attribution(App& app, const std::string& run_id, bool json, std::ostream& out);

// Exit 2 when any requested toolchain (default: all) is missing.
int cmd_doctor(App& app, const std::vector<Language>& languages, std::ostream& out);

// Full command line: parsing, config resolution, dispatch and the mapping of
// exceptions onto exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace specbridge
