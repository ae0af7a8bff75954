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

#include <stdexcept>
#include <string>

namespace specbridge {

// Base for every error raised by the library. Each subclass maps onto one
// CLI exit code (see tools/specbridge.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (empty source, IO spec passed to
// back-translation, empty compiler log, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Bad or unsupported configuration: unknown language pair, invalid budgets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Something outside the process is missing or broken: toolchain absent,
// scratch directory not writable, provider unreachable after retries.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

class ReplayMiss : public Error {
 public:
  explicit ReplayMiss(std::string digest)
      : Error("replay fixture missing for prompt digest " + digest),
        digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

class SpecParseFailed : public Error {
 public:
  using Error::Error;
};

class UndefinedImprovement : public Error {
 public:
  using Error::Error;
};

// Malformed persisted data (trace logs, store records, manifests).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace specbridge
