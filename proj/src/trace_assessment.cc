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

#include "iterfix/trace_assessment.h"

#include <system_error>
#include <utility>

#include "iterfix/error.h"
#include "iterfix/hunk_diff.h"
#include "iterfix/subprocess.h"
#include "iterfix/text.h"

namespace iterfix {

namespace fs = std::filesystem;

namespace {

std::optional<ProvidedTrace> ParseProvided(std::string text,
                                           const std::string &origin) {
  try {
    TaintTrace trace = ParseTraceLog(text);
    return ProvidedTrace{std::move(trace), std::move(text)};
  } catch (const Error &e) {
    throw Error(ErrorCode::kProviderFault,
                "unusable trace from " + origin + ": " + e.what(), origin);
  }
}

}  // namespace

std::optional<ProvidedTrace> FixtureTraceProvider::TraceFor(
    const ProgramVariant &variant, const PoV &pov) {
  if (!variant.Compiled()) return std::nullopt;
  const fs::path log = variant.LogDir() / ("trace-" + pov.id + ".log");
  std::error_code ec;
  fs::remove(log, ec);

  ProcessOptions run;
  run.cwd = variant.SourceRoot();
  run.timeout_s = variant.build_recipe.run_timeout_s;
  run.env[kTraceEnv] = fs::absolute(log).string();
  run.stdout_path = variant.LogDir() / ("trace-" + pov.id + ".stdout");
  run.stderr_path = variant.LogDir() / ("trace-" + pov.id + ".stderr");
  RunShellCommand(variant.build_recipe.RunCommandFor(pov.payload_path), run);
  if (!fs::exists(log, ec)) return std::nullopt;
  return ParseProvided(ReadFile(log), log.string());
}

ExternalCommandTraceProvider::ExternalCommandTraceProvider(
    std::string command_template, double timeout_s)
    : command_template_(std::move(command_template)), timeout_s_(timeout_s) {}

std::optional<ProvidedTrace> ExternalCommandTraceProvider::TraceFor(
    const ProgramVariant &variant, const PoV &pov) {
  if (!variant.Compiled()) return std::nullopt;
  std::string command = command_template_;
  command = ReplaceAll(command, "{workdir}",
                       ShellQuote(fs::absolute(variant.workdir).string()));
  command = ReplaceAll(command, "{program}",
                       ShellQuote(fs::absolute(variant.SourceRoot()).string()));
  command = ReplaceAll(command, "{payload}", ShellQuote(pov.payload_path.string()));
  command = ReplaceAll(command, "{pov}", ShellQuote(pov.id));

  ProcessOptions run;
  run.cwd = variant.SourceRoot();
  run.timeout_s = timeout_s_;
  run.stdout_path = variant.LogDir() / ("trace-" + pov.id + ".log");
  run.stderr_path = variant.LogDir() / ("trace-" + pov.id + ".stderr");
  const ProcessResult result = RunShellCommand(command, run);
  if (result.status.timed_out || !result.status.exited ||
      result.status.code != 0) {
    throw Error(ErrorCode::kProviderFault,
                "trace command " + result.status.Describe() + ": " +
                    TailExcerpt(result.stderr_text, 512),
                variant.origin_patch_id);
  }
  if (Trim(result.stdout_text).empty()) return std::nullopt;
  return ParseProvided(result.stdout_text, "trace command");
}

std::optional<StatementRef> MapToOriginal(const StatementRef &ref,
                                          const FunctionSnapshot &original,
                                          const FunctionSnapshot &patched) {
  if (ref.file != original.file()) return ref;
  const int start = original.start_line();
  if (ref.line < start) return ref;
  const int patched_end = start + patched.size() - 1;
  if (ref.line > patched_end) {
    return StatementRef{ref.file, ref.line - patched.size() + original.size()};
  }
  const LineAlignment align = AlignLines(original.lines(), patched.lines());
  const int old_local = align.new_to_old[ref.line - start];
  if (old_local == 0) return std::nullopt;
  return StatementRef{ref.file, original.FileLine(old_local)};
}

AssessResult Assess(const CandidatePatch &patch,
                    const VerificationOutcome &outcome,
                    TraceProvider &provider, const ProgramVariant &variant,
                    const PoV &pov, const OriginalContext &original,
                    const FitnessFunction &fitness) {
  using Category = VerificationOutcome::Category;
  if (outcome.category == Category::kPlausible ||
      outcome.category == Category::kTimeout) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string(CategoryName(outcome.category)) +
                    " patches are not assessed",
                patch.patch_id);
  }
  AssessResult result;
  AssessedPatch assessed;
  assessed.patch = patch;
  assessed.outcome = outcome;
  assessed.content_hash = patch.ContentHash();
  assessed.changed_lines =
      patch.patched_function
          ? ComputeHunks(original.function, *patch.patched_function)
                .ChangedLines()
          : original.function.size();

  if (outcome.category == Category::kCompileFail) {
    result.assessed = std::move(assessed);
    return result;
  }

  std::optional<ProvidedTrace> provided;
  try {
    provided = provider.TraceFor(variant, pov);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kProviderFault &&
        e.code() != ErrorCode::kHarnessFault) {
      throw;
    }
    result.discard_reason = std::string("provider fault: ") + e.what();
    return result;
  }
  if (!provided) {
    result.discard_reason = "provider returned no trace";
    return result;
  }
  result.trace_log = provided->log_text;

  // Compare sinks in original coordinates.
  TaintTrace remapped = provided->trace;
  const FunctionSnapshot &patched =
      patch.patched_function ? *patch.patched_function : original.function;
  std::optional<StatementRef> sink =
      MapToOriginal(remapped.sink, original.function, patched);
  const bool new_vuln =
      !sink || [&] {
        remapped.sink = *sink;
        return IntroducesNewVulnerability(original.trace, remapped);
      }();
  if (new_vuln) {
    result.discard_reason = "new vulnerability: " + provided->trace.cwe_id +
                            " at " + provided->trace.sink.ToString() +
                            ", original " + original.trace.cwe_id + " at " +
                            original.trace.sink.ToString();
    return result;
  }
  assessed.fitness = fitness.Score(provided->trace);
  assessed.trace = std::move(provided->trace);
  result.assessed = std::move(assessed);
  return result;
}

}  // namespace iterfix
