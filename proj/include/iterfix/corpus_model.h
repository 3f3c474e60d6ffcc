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

// Domain types for repair tasks: programs, functions, PoVs and localization
// results, plus the task-directory loader.
//
// Task directory layout:
//
//   task.json          {task_id, cwe_id, build: {compile_command,
//                       run_command_template, compile_timeout_s,
//                       run_timeout_s}}
//   program/           source tree, copied into every variant
//   povs/<id>/payload  PoV input
//   povs/<id>/pov.json {expected_failure_signature}
//   localization.json  {file, function, start_line, end_line,
//                       vulnerable_hunks: [{start, end}], trace: <log path>}
//
// All line numbers downstream of the loader are function-local and 1-based.

#ifndef ITERFIX_CORPUS_MODEL_H_
#define ITERFIX_CORPUS_MODEL_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iterfix/taint_trace.h"

namespace iterfix {

struct BuildRecipe {
  static constexpr std::string_view kPovPlaceholder = "{pov}";

  std::string compile_command;
  // Must contain kPovPlaceholder exactly once.
  std::string run_command_template;
  double compile_timeout_s = 60;
  double run_timeout_s = 10;

  // Throws Error(kInvariantViolation).
  void Validate() const;
  // Substitutes the (shell-quoted) payload path.
  std::string RunCommandFor(const std::filesystem::path &payload) const;

  friend bool operator==(const BuildRecipe &, const BuildRecipe &) = default;
};

struct SourceProgram {
  std::filesystem::path root_path;
  // Relative to root_path, generic separators, sorted.
  std::vector<std::string> source_files;
  BuildRecipe build_recipe;

  bool Contains(std::string_view file) const;

  friend bool operator==(const SourceProgram &, const SourceProgram &) =
      default;
};

// A dense 1..n numbered view of one function. Local line i lives at file
// line start_line + i - 1.
class FunctionSnapshot {
 public:
  FunctionSnapshot() = default;
  // Throws Error(kInvariantViolation) when `lines` is empty or
  // start_line < 1.
  FunctionSnapshot(std::string file, std::string name, int start_line,
                   std::vector<std::string> lines);

  const std::string &file() const { return file_; }
  const std::string &name() const { return name_; }
  int start_line() const { return start_line_; }
  int size() const { return static_cast<int>(lines_.size()); }
  const std::vector<std::string> &lines() const { return lines_; }
  // 1-based, function-local.
  const std::string &line(int local) const { return lines_.at(local - 1); }

  int FileLine(int local) const { return start_line_ + local - 1; }
  std::optional<int> LocalLine(int file_line) const;
  int end_line() const { return FileLine(size()); }

  // Lines joined with '\n', trailing newline included.
  std::string Text() const;
  // "  7: text" rendering used in prompts.
  std::string Numbered() const;

  // Same function identity, different body.
  FunctionSnapshot WithLines(std::vector<std::string> lines) const;

  friend bool operator==(const FunctionSnapshot &,
                         const FunctionSnapshot &) = default;

 private:
  std::string file_;
  std::string name_;
  int start_line_ = 1;
  std::vector<std::string> lines_;
};

struct HunkLocation {
  int start_line = 1;
  int end_line = 1;

  bool Within(int n) const {
    return 1 <= start_line && start_line <= end_line && end_line <= n;
  }
  std::string ToString() const;

  friend bool operator==(const HunkLocation &, const HunkLocation &) = default;
};

struct PoV {
  std::string id;
  std::filesystem::path payload_path;
  std::string expected_failure_signature;

  friend bool operator==(const PoV &, const PoV &) = default;
};

struct LocalizationResult {
  FunctionSnapshot function;
  std::vector<HunkLocation> vulnerable_hunks;
  TaintTrace original_trace;

  friend bool operator==(const LocalizationResult &,
                         const LocalizationResult &) = default;
};

struct RepairTask {
  std::string task_id;
  std::filesystem::path task_dir;
  SourceProgram program;
  std::vector<PoV> povs;
  std::string cwe_id;
  LocalizationResult localization;

  friend bool operator==(const RepairTask &, const RepairTask &) = default;
};

// Loads and validates a task directory. Throws Error(kMissingFile) naming
// the absent artifact ("task.json", "program", "povs", "localization.json",
// or a PoV file), Error(kSchemaViolation) naming the offending field, or
// Error(kInvariantViolation).
RepairTask LoadTask(const std::filesystem::path &task_dir);

// Materializes file lines [start_line, end_line] as a snapshot. Throws
// Error(kFileNotInProgram) or Error(kRangeOutOfFile).
FunctionSnapshot ExtractFunction(const SourceProgram &program,
                                 const std::string &file,
                                 const std::string &name, int start_line,
                                 int end_line);

}  // namespace iterfix

#endif  // ITERFIX_CORPUS_MODEL_H_
