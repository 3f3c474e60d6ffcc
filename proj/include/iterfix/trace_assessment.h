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

// Patch quality assessment: taint traces for failing variants, the
// new-vulnerability filter and the fitness used to rank failing patches.

#ifndef ITERFIX_TRACE_ASSESSMENT_H_
#define ITERFIX_TRACE_ASSESSMENT_H_

#include <optional>
#include <string>

#include "iterfix/corpus_model.h"
#include "iterfix/patch_generation.h"
#include "iterfix/taint_trace.h"
#include "iterfix/verification.h"

namespace iterfix {

// A trace plus the raw log it came from (kept for the run archive).
struct ProvidedTrace {
  TaintTrace trace;
  std::string log_text;
};

class TraceProvider {
 public:
  virtual ~TraceProvider() = default;
  // nullopt when the variant cannot run. Throws Error(kProviderFault) when
  // extraction itself breaks. Calls for distinct variants may overlap.
  virtual std::optional<ProvidedTrace> TraceFor(const ProgramVariant &variant,
                                                const PoV &pov) = 0;
};

// Reruns the PoV on the compiled variant with ITERFIX_TRACE_LOG pointing at
// <workdir>/logs/trace-<pov>.log and parses what the instrumented program
// wrote there.
class FixtureTraceProvider : public TraceProvider {
 public:
  static constexpr const char *kTraceEnv = "ITERFIX_TRACE_LOG";

  std::optional<ProvidedTrace> TraceFor(const ProgramVariant &variant,
                                        const PoV &pov) override;
};

// Runs a user-supplied command (in the variant's program tree) whose stdout
// is a trace log. The template may use {workdir}, {program}, {pov} and
// {payload}; substitutions are shell-quoted.
class ExternalCommandTraceProvider : public TraceProvider {
 public:
  explicit ExternalCommandTraceProvider(std::string command_template,
                                        double timeout_s = 60);

  std::optional<ProvidedTrace> TraceFor(const ProgramVariant &variant,
                                        const PoV &pov) override;

 private:
  std::string command_template_;
  double timeout_s_;
};

class FitnessFunction {
 public:
  virtual ~FitnessFunction() = default;
  // In [0, 1].
  virtual double Score(const TaintTrace &trace) const = 0;
  virtual std::string Name() const = 0;
};

class TscFitness : public FitnessFunction {
 public:
  double Score(const TaintTrace &trace) const override {
    return TaintStatementCoverage(trace);
  }
  std::string Name() const override { return "tsc"; }
};

struct AssessedPatch {
  CandidatePatch patch;
  VerificationOutcome outcome;
  std::optional<TaintTrace> trace;
  bool introduces_new_vuln = false;
  double fitness = 0;
  // Removed plus inserted lines against the original function.
  int changed_lines = 0;
  std::string content_hash;
};

struct AssessResult {
  std::optional<AssessedPatch> assessed;
  // Set when the patch was discarded.
  std::string discard_reason;
  std::optional<std::string> trace_log;
};

// What assessment needs to know about the unpatched program.
struct OriginalContext {
  const FunctionSnapshot &function;
  const TaintTrace &trace;
};

// Maps a statement of the patched program back to original coordinates.
// Lines of the patched function's file outside the function shift by the
// length difference; lines inside map through the line alignment, and
// inserted lines have no original counterpart.
std::optional<StatementRef> MapToOriginal(const StatementRef &ref,
                                          const FunctionSnapshot &original,
                                          const FunctionSnapshot &patched);

// FailingPoV: traces `pov`, drops the patch if the CWE or the (remapped)
// sink changed, else scores it. CompileFail: kept with fitness 0 and no
// trace. Plausible and Timeout outcomes are rejected with
// Error(kInvariantViolation). Provider faults discard the patch.
AssessResult Assess(const CandidatePatch &patch,
                    const VerificationOutcome &outcome,
                    TraceProvider &provider, const ProgramVariant &variant,
                    const PoV &pov, const OriginalContext &original,
                    const FitnessFunction &fitness);

}  // namespace iterfix

#endif  // ITERFIX_TRACE_ASSESSMENT_H_
