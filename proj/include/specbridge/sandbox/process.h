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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace specbridge {

struct ProcessOptions {
  std::filesystem::path cwd;
  std::string stdin_data;
  std::chrono::milliseconds timeout{10'000};
  std::size_t max_output_bytes = 1 << 20;
  // RLIMIT_AS in bytes; 0 leaves the limit alone.
  std::size_t memory_limit = 0;
  // Added to (or overriding) the inherited environment.
  std::map<std::string, std::string> env;
};

struct ProcessResult {
  int exit_code = -1;         // valid when signal == 0
  int signal = 0;             // terminating signal, 0 if exited normally
  bool timed_out = false;
  bool spawn_failed = false;  // exec failed (command not found, ...)
  std::string stdout_data;
  std::string stderr_data;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  std::chrono::milliseconds duration{0};

  bool ok() const { return !spawn_failed && !timed_out && signal == 0 && exit_code == 0; }
};

// Runs argv[0] (PATH lookup) in its own process group. On timeout the whole
// group receives SIGKILL. Output beyond max_output_bytes is drained and
// dropped so the child never blocks on a full pipe.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

}  // namespace specbridge
