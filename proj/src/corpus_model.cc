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

#include "iterfix/corpus_model.h"

#include <algorithm>
#include <set>

#include "iterfix/error.h"
#include "iterfix/text.h"
#include "json_util.h"

namespace iterfix {

namespace fs = std::filesystem;
using internal::Json;
using internal::RequireField;
using internal::RequireInt;
using internal::RequireNumber;
using internal::RequireString;

void BuildRecipe::Validate() const {
  if (Trim(compile_command).empty()) {
    throw Error(ErrorCode::kInvariantViolation,
                "build.compile_command is empty", "compile_command");
  }
  if (!(compile_timeout_s > 0) || !(run_timeout_s > 0)) {
    throw Error(ErrorCode::kInvariantViolation, "timeouts must be positive",
                "timeout");
  }
  const std::size_t first = run_command_template.find(kPovPlaceholder);
  if (first == std::string::npos ||
      run_command_template.find(kPovPlaceholder, first + 1) !=
          std::string::npos) {
    throw Error(ErrorCode::kInvariantViolation,
                "run_command_template must contain exactly one " +
                    std::string(kPovPlaceholder),
                "run_command_template");
  }
}

std::string BuildRecipe::RunCommandFor(const fs::path &payload) const {
  return ReplaceAll(run_command_template, kPovPlaceholder,
                    ShellQuote(payload.string()));
}

bool SourceProgram::Contains(std::string_view file) const {
  return std::binary_search(source_files.begin(), source_files.end(), file);
}

FunctionSnapshot::FunctionSnapshot(std::string file, std::string name,
                                   int start_line,
                                   std::vector<std::string> lines)
    : file_(std::move(file)),
      name_(std::move(name)),
      start_line_(start_line),
      lines_(std::move(lines)) {
  if (lines_.empty()) {
    throw Error(ErrorCode::kInvariantViolation,
                "function snapshot must hold at least one line", "lines");
  }
  if (start_line_ < 1) {
    throw Error(ErrorCode::kInvariantViolation, "start_line must be >= 1",
                "start_line");
  }
}

std::optional<int> FunctionSnapshot::LocalLine(int file_line) const {
  const int local = file_line - start_line_ + 1;
  if (local < 1 || local > size()) return std::nullopt;
  return local;
}

std::string FunctionSnapshot::Text() const { return JoinLines(lines_, true); }

std::string FunctionSnapshot::Numbered() const {
  const std::size_t width = std::to_string(lines_.size()).size();
  std::string out;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    std::string number = std::to_string(i + 1);
    out.append(width - number.size(), ' ');
    out += number;
    out += ": ";
    out += lines_[i];
    out += '\n';
  }
  return out;
}

FunctionSnapshot FunctionSnapshot::WithLines(
    std::vector<std::string> lines) const {
  return FunctionSnapshot(file_, name_, start_line_, std::move(lines));
}

std::string HunkLocation::ToString() const {
  if (start_line == end_line) return std::to_string(start_line);
  return std::to_string(start_line) + "-" + std::to_string(end_line);
}

FunctionSnapshot ExtractFunction(const SourceProgram &program,
                                 const std::string &file,
                                 const std::string &name, int start_line,
                                 int end_line) {
  if (!program.Contains(file)) {
    throw Error(ErrorCode::kFileNotInProgram,
                file + " is not part of the program", file);
  }
  const SplitText text = SplitLines(ReadFile(program.root_path / file));
  const int file_lines = static_cast<int>(text.lines.size());
  if (start_line < 1 || end_line < start_line || end_line > file_lines) {
    throw Error(ErrorCode::kRangeOutOfFile,
                "range " + std::to_string(start_line) + ":" +
                    std::to_string(end_line) + " outside " + file + " (" +
                    std::to_string(file_lines) + " lines)",
                file);
  }
  std::vector<std::string> lines(text.lines.begin() + (start_line - 1),
                                 text.lines.begin() + end_line);
  return FunctionSnapshot(file, name, start_line, std::move(lines));
}

namespace {

void RequireDir(const fs::path &path, const std::string &artifact) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    throw Error(ErrorCode::kMissingFile,
                "missing " + artifact + " (" + path.string() + ")", artifact);
  }
}

std::vector<std::string> ListSources(const fs::path &root) {
  std::vector<std::string> files;
  for (const auto &entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files.push_back(fs::relative(entry.path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

BuildRecipe ParseBuild(const Json &task) {
  const Json &build = RequireField(task, "build", "");
  BuildRecipe recipe;
  recipe.compile_command = RequireString(build, "compile_command", "build");
  recipe.run_command_template =
      RequireString(build, "run_command_template", "build");
  recipe.compile_timeout_s = RequireNumber(build, "compile_timeout_s", "build");
  recipe.run_timeout_s = RequireNumber(build, "run_timeout_s", "build");
  recipe.Validate();
  return recipe;
}

std::vector<PoV> LoadPovs(const fs::path &povs_dir) {
  std::vector<fs::path> dirs;
  for (const auto &entry : fs::directory_iterator(povs_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<PoV> povs;
  for (const fs::path &dir : dirs) {
    const std::string id = dir.filename().string();
    const fs::path payload = dir / "payload";
    std::error_code ec;
    if (!fs::is_regular_file(payload, ec)) {
      throw Error(ErrorCode::kMissingFile, "PoV " + id + " has no payload",
                  "povs/" + id + "/payload");
    }
    const Json meta =
        internal::ReadJsonFile(dir / "pov.json", "povs/" + id + "/pov.json");
    PoV pov;
    pov.id = id;
    pov.payload_path = fs::absolute(payload).lexically_normal();
    pov.expected_failure_signature =
        RequireString(meta, "expected_failure_signature", "pov.json");
    povs.push_back(std::move(pov));
  }
  if (povs.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "task has no PoVs", "povs");
  }
  return povs;
}

LocalizationResult LoadLocalization(const fs::path &task_dir,
                                    const SourceProgram &program) {
  const Json loc =
      internal::ReadJsonFile(task_dir / "localization.json",
                             "localization.json");
  const std::string file = RequireString(loc, "file", "localization");
  const std::string function = RequireString(loc, "function", "localization");
  const int start = RequireInt(loc, "start_line", "localization");
  const int end = RequireInt(loc, "end_line", "localization");

  LocalizationResult result;
  try {
    result.function = ExtractFunction(program, file, function, start, end);
  } catch (const Error &e) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string("localization function: ") + e.what(),
                "localization.function");
  }

  const Json &hunks = RequireField(loc, "vulnerable_hunks", "localization");
  if (!hunks.is_array()) {
    internal::SchemaError("localization.vulnerable_hunks", "expected an array");
  }
  for (const Json &hunk : hunks) {
    HunkLocation h{RequireInt(hunk, "start", "vulnerable_hunks"),
                   RequireInt(hunk, "end", "vulnerable_hunks")};
    if (!h.Within(result.function.size())) {
      throw Error(ErrorCode::kInvariantViolation,
                  "vulnerable hunk " + h.ToString() + " outside function of " +
                      std::to_string(result.function.size()) + " lines",
                  "vulnerable_hunks");
    }
    result.vulnerable_hunks.push_back(h);
  }
  if (result.vulnerable_hunks.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "no vulnerable hunks",
                "vulnerable_hunks");
  }

  const std::string trace_path = RequireString(loc, "trace", "localization");
  const fs::path trace_file = task_dir / trace_path;
  std::error_code ec;
  if (!fs::is_regular_file(trace_file, ec)) {
    throw Error(ErrorCode::kMissingFile, "missing trace log " + trace_path,
                trace_path);
  }
  result.original_trace = ParseTraceLog(ReadFile(trace_file));
  return result;
}

}  // namespace

RepairTask LoadTask(const fs::path &task_dir) {
  RequireDir(task_dir, "task directory");
  const Json task = internal::ReadJsonFile(task_dir / "task.json", "task.json");
  RequireDir(task_dir / "program", "program");
  RequireDir(task_dir / "povs", "povs");

  RepairTask out;
  out.task_dir = fs::absolute(task_dir).lexically_normal();
  out.task_id = RequireString(task, "task_id", "");
  out.cwe_id = RequireString(task, "cwe_id", "");
  if (out.task_id.empty()) internal::SchemaError("task_id", "must not be empty");
  if (out.cwe_id.empty()) internal::SchemaError("cwe_id", "must not be empty");

  out.program.root_path = out.task_dir / "program";
  out.program.source_files = ListSources(out.program.root_path);
  out.program.build_recipe = ParseBuild(task);
  out.povs = LoadPovs(task_dir / "povs");
  out.localization = LoadLocalization(out.task_dir, out.program);

  if (out.localization.original_trace.cwe_id != out.cwe_id) {
    throw Error(ErrorCode::kInvariantViolation,
                "task cwe_id " + out.cwe_id + " does not match trace CWE " +
                    out.localization.original_trace.cwe_id,
                "cwe_id");
  }
  return out;
}

}  // namespace iterfix
