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

#include "iterfix/verification.h"

#include <signal.h>

#include <array>

#include "iterfix/error.h"
#include "iterfix/text.h"

namespace iterfix {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFailureMessageLimit = 2048;

constexpr std::array<std::string_view, 7> kSanitizerMarkers = {
    "ERROR: AddressSanitizer",     "ERROR: LeakSanitizer",
    "ERROR: MemorySanitizer",      "WARNING: ThreadSanitizer",
    "ERROR: UndefinedBehaviorSanitizer", "runtime error:",
    "ERROR: sanitizer:",
};

bool IsFatalSignal(int sig) {
  switch (sig) {
    case SIGSEGV:
    case SIGABRT:
    case SIGBUS:
    case SIGFPE:
    case SIGILL:
    case SIGTRAP:
    case SIGSYS:
      return true;
    default:
      return false;
  }
}

}  // namespace

bool ProgramVariant::Compiled() const {
  std::error_code ec;
  return fs::exists(CompileMarker(), ec);
}

VerificationOutcome VerificationOutcome::Plausible() { return {}; }

VerificationOutcome VerificationOutcome::FailingPoV(
    std::vector<std::string> ids, std::vector<std::string> messages) {
  VerificationOutcome o;
  o.category = Category::kFailingPoV;
  o.failed_pov_ids = std::move(ids);
  o.failure_messages = std::move(messages);
  return o;
}

VerificationOutcome VerificationOutcome::CompileFail(std::string log_excerpt) {
  VerificationOutcome o;
  o.category = Category::kCompileFail;
  o.log_excerpt = std::move(log_excerpt);
  return o;
}

VerificationOutcome VerificationOutcome::Timeout(
    Stage stage, std::optional<std::string> pov_id) {
  VerificationOutcome o;
  o.category = Category::kTimeout;
  o.stage = stage;
  o.timeout_pov_id = std::move(pov_id);
  return o;
}

std::string VerificationOutcome::Summary() const {
  switch (category) {
    case Category::kPlausible:
      return "passes all PoVs";
    case Category::kFailingPoV: {
      std::string out = "fails PoV";
      for (std::size_t i = 0; i < failed_pov_ids.size(); ++i) {
        out += i == 0 ? " " : ", ";
        out += failed_pov_ids[i];
      }
      return out;
    }
    case Category::kCompileFail:
      return "does not compile";
    case Category::kTimeout:
      return stage == Stage::kCompile
                 ? "compile timed out"
                 : "PoV " + timeout_pov_id.value_or("?") + " timed out";
  }
  return {};
}

std::string_view CategoryName(VerificationOutcome::Category category) {
  switch (category) {
    case VerificationOutcome::Category::kPlausible: return "plausible";
    case VerificationOutcome::Category::kFailingPoV: return "failing_pov";
    case VerificationOutcome::Category::kCompileFail: return "compile_fail";
    case VerificationOutcome::Category::kTimeout: return "timeout";
  }
  return "unknown";
}

PovVerdict ClassifyFailureMessage(std::string_view output,
                                  const ExitStatus &status,
                                  std::string_view signature) {
  if (status.signaled) return PovVerdict::kTriggered;
  if (status.exited && status.code > 128 &&
      IsFatalSignal(status.code - 128)) {
    return PovVerdict::kTriggered;
  }
  for (std::string_view marker : kSanitizerMarkers) {
    if (output.find(marker) != std::string_view::npos) {
      return PovVerdict::kTriggered;
    }
  }
  if (!signature.empty() && output.find(signature) != std::string_view::npos) {
    return PovVerdict::kTriggered;
  }
  return PovVerdict::kClean;
}

VerificationOutcome Verify(const ProgramVariant &variant,
                           std::span<const PoV> povs,
                           const VerifyOptions &options) {
  if (povs.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "no PoVs to verify", "povs");
  }
  std::error_code ec;
  if (!fs::is_directory(variant.SourceRoot(), ec)) {
    throw Error(ErrorCode::kHarnessFault,
                "variant has no program tree: " + variant.SourceRoot().string());
  }
  fs::create_directories(variant.LogDir(), ec);
  if (ec) {
    throw Error(ErrorCode::kHarnessFault,
                "cannot create log dir: " + ec.message());
  }
  fs::remove(variant.CompileMarker(), ec);

  ProcessOptions compile;
  compile.cwd = variant.SourceRoot();
  compile.timeout_s = variant.build_recipe.compile_timeout_s;
  compile.stdout_path = variant.LogDir() / "compile.stdout";
  compile.stderr_path = variant.LogDir() / "compile.stderr";
  const ProcessResult built =
      RunShellCommand(variant.build_recipe.compile_command, compile);
  if (built.status.timed_out) {
    return VerificationOutcome::Timeout(VerificationOutcome::Stage::kCompile,
                                        std::nullopt);
  }
  if (!built.status.exited || built.status.code != 0) {
    std::string log = built.CombinedOutput();
    if (Trim(log).empty()) log = "compiler " + built.status.Describe();
    return VerificationOutcome::CompileFail(
        TailExcerpt(log, options.log_excerpt_limit));
  }
  WriteFile(variant.CompileMarker(), "");

  std::vector<std::string> failed;
  std::vector<std::string> messages;
  for (const PoV &pov : povs) {
    ProcessOptions run;
    run.cwd = variant.SourceRoot();
    run.timeout_s = variant.build_recipe.run_timeout_s;
    run.env = options.run_env;
    run.stdout_path = variant.LogDir() / ("pov-" + pov.id + ".stdout");
    run.stderr_path = variant.LogDir() / ("pov-" + pov.id + ".stderr");
    const ProcessResult ran = RunShellCommand(
        variant.build_recipe.RunCommandFor(pov.payload_path), run);
    if (ran.status.timed_out) {
      return VerificationOutcome::Timeout(VerificationOutcome::Stage::kRun,
                                          pov.id);
    }
    const std::string output = ran.CombinedOutput();
    if (ClassifyFailureMessage(output, ran.status,
                               pov.expected_failure_signature) ==
        PovVerdict::kTriggered) {
      failed.push_back(pov.id);
      std::string message = ran.status.Describe();
      const std::string_view trimmed = Trim(output);
      if (!trimmed.empty()) {
        message += "\n" + TailExcerpt(trimmed, kFailureMessageLimit);
      }
      messages.push_back(std::move(message));
    }
  }
  if (!failed.empty()) {
    return VerificationOutcome::FailingPoV(std::move(failed),
                                           std::move(messages));
  }
  return VerificationOutcome::Plausible();
}

}  // namespace iterfix
