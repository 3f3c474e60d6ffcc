// Copyright 2026 The Iterfix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success (plausible for repair),
// 2 repair exhausted, 1 any error.

#ifndef ITERFIX_CLI_H_
#define ITERFIX_CLI_H_

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iterfix/orchestrator.h"

namespace iterfix {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitExhausted = 2;

inline constexpr const char *kEnvEndpoint = "ITERFIX_ENDPOINT";
inline constexpr const char *kEnvModel = "ITERFIX_MODEL";
inline constexpr const char *kEnvApiKey = "ITERFIX_API_KEY";

// Everything `repair` needs after merging flags, environment, config file
// and defaults (in that order of precedence).
struct CliConfig {
  RunConfig run;
  std::string backend = "scripted";  // or "live"
  std::optional<std::filesystem::path> responses_dir;
  std::string provider = "fixture";  // or "external"
  std::string external_trace_cmd;
  std::optional<std::filesystem::path> example_bank;
  LiveBackendConfig live;

  // Throws Error(kConfigError).
  void Validate() const;
};

// Applies a JSON config file on top of `config`. Unknown keys, and secrets,
// are rejected with Error(kConfigError).
void ApplyConfigFile(const std::filesystem::path &path, CliConfig &config);

// Applies ITERFIX_* variables taken from `env`.
void ApplyEnvironment(const std::map<std::string, std::string> &env,
                      CliConfig &config);

// Runs one command; `args` includes the program name.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace iterfix

#endif  // ITERFIX_CLI_H_
