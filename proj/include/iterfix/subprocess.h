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

// Runs /bin/sh commands in their own process group with a wall-clock
// timeout. stdout and stderr go to files so that large outputs never block
// the child.

#ifndef ITERFIX_SUBPROCESS_H_
#define ITERFIX_SUBPROCESS_H_

#include <filesystem>
#include <map>
#include <string>

namespace iterfix {

struct ExitStatus {
  bool exited = false;     // normal exit, `code` valid
  int code = 0;
  bool signaled = false;   // killed by a signal, `signal` valid
  int signal = 0;
  bool timed_out = false;  // killed by us after the deadline

  std::string Describe() const;
};

struct ProcessOptions {
  std::filesystem::path cwd;
  double timeout_s = 10;
  std::map<std::string, std::string> env;  // added to the inherited set
  std::filesystem::path stdout_path;       // required
  std::filesystem::path stderr_path;       // required
};

struct ProcessResult {
  ExitStatus status;
  std::string stdout_text;
  std::string stderr_text;
  double elapsed_s = 0;

  std::string CombinedOutput() const { return stdout_text + stderr_text; }
};

// Throws Error(kHarnessFault) when the process cannot be started or its
// output files cannot be created.
ProcessResult RunShellCommand(const std::string &command,
                              const ProcessOptions &options);

}  // namespace iterfix

#endif  // ITERFIX_SUBPROCESS_H_
