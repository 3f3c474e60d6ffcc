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

// Location-aware patch generation: few-shot selection, patch-hunk location
// prediction, chain-of-thought prompt construction, candidate generation and
// application of a patched function to a copy of the program.

#ifndef ITERFIX_PATCH_GENERATION_H_
#define ITERFIX_PATCH_GENERATION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iterfix/backend.h"
#include "iterfix/corpus_model.h"
#include "iterfix/hunk_diff.h"
#include "iterfix/verification.h"

namespace iterfix {

inline constexpr std::string_view kGeneratorRole =
    "You are now playing the role of an automated vulnerability repair tool.";
inline constexpr std::string_view kPredictorRole =
    "You are a patch hunk location predictor for C functions. You translate a "
    "vulnerable function and its vulnerable hunk locations into a patch hunk "
    "location sequence.";

struct FewShotExample {
  std::string cwe_id;
  FunctionSnapshot vulnerable_function;
  FunctionSnapshot patch_function;
  std::vector<HunkLocation> vulnerable_hunks;
  // Always ToLocationSequence(ComputeHunks(vulnerable, patch)).
  LocationSequence ground_truth_sequence;

  // Derives the sequence by diffing; `hunks` defaults to the diff's edit
  // regions. Throws Error(kInvariantViolation) for identical functions.
  static FewShotExample FromPair(std::string cwe_id,
                                 FunctionSnapshot vulnerable,
                                 FunctionSnapshot patch,
                                 std::optional<std::vector<HunkLocation>>
                                     hunks = std::nullopt);
};

// Bank file: {"provenance": str, "examples": [{"cwe_id", "vulnerable_function",
// "patch_function", "vulnerable_hunks"?, "ground_truth_sequence"?}]}. Function
// bodies are strings or arrays of lines. A stated ground_truth_sequence must
// agree with the diff.
class ExampleBank {
 public:
  ExampleBank() = default;
  ExampleBank(std::string provenance, std::vector<FewShotExample> examples);

  static ExampleBank Load(const std::filesystem::path &path);

  const std::string &provenance() const { return provenance_; }
  const std::vector<FewShotExample> &examples() const { return examples_; }

 private:
  std::string provenance_;
  std::vector<FewShotExample> examples_;
};

// Draws `count` distinct examples, same-CWE first; when the bank has fewer
// same-CWE examples the rest come from the other CWEs. Deterministic in
// `seed`. Throws Error(kEmptyBankForCwe) when the whole bank is too small.
std::vector<FewShotExample> SelectFewShots(const ExampleBank &bank,
                                           const std::string &cwe_id,
                                           int count, std::uint64_t seed);

struct PromptSection {
  enum class Kind { kPreamble, kFewShot, kTarget };
  Kind kind;
  std::string text;
};

struct PromptBundle {
  std::string system_message;
  std::string user_message;  // concatenation of the sections
  std::string digest;        // SHA-256 of user_message
  std::vector<PromptSection> sections;
};

// What the prompt asks to repair.
struct RepairTarget {
  std::string cwe_id;
  FunctionSnapshot function;
  std::vector<HunkLocation> vulnerable_hunks;
  // Failure information from the parent patch, if any.
  std::optional<std::string> feedback;
};

PromptBundle BuildLocationPrompt(const RepairTarget &target,
                                 const std::vector<FewShotExample> &shots);

struct PredictionOptions {
  int retry_budget = 2;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

struct LocationPrediction {
  LocationSequence sequence;
  PromptBundle prompt;
  std::vector<std::string> responses;  // every raw response, in order
  bool used_fallback = false;
  int backend_calls = 0;
};

// Finds the first {...} group in `response` and parses it; nullopt when it
// is missing, malformed, or not anchored to `anchor_length` lines.
std::optional<LocationSequence> ParsePredictionResponse(
    std::string_view response, int anchor_length);

// Identity sequence with one [ADD] right before each hunk's first line.
LocationSequence FallbackSequence(int anchor_length,
                                  const std::vector<HunkLocation> &hunks);

// One backend call plus up to retry_budget retries for unusable answers;
// then FallbackSequence. Backend errors propagate.
LocationPrediction PredictPatchLocations(
    const RepairTarget &target, const std::vector<FewShotExample> &shots,
    GeneratorBackend &backend, const PredictionOptions &options = {});

// Chain-of-thought prompt: preamble, two few-shot blocks carrying their
// ground-truth sequences, then the target block carrying `predicted`. Each
// block walks through Step 1 (vulnerable hunk), Step 2 (location sequence)
// and Step 3 (patch).
PromptBundle BuildPrompt(const RepairTarget &target,
                         const LocationSequence &predicted,
                         const std::vector<FewShotExample> &shots);
PromptBundle BuildPrompt(const RepairTask &task,
                         const LocationSequence &predicted,
                         const std::vector<FewShotExample> &shots);

struct CandidatePatch {
  std::string patch_id;
  int iteration = 1;
  std::optional<std::string> parent_id;
  // Absent when the response held no usable code; such patches count as
  // compile failures.
  std::optional<FunctionSnapshot> patched_function;
  std::string prompt_digest;
  std::string raw_response;
  std::string raw_response_excerpt;
  // True when the patch's own location sequence differs from the predicted
  // one. Informational only.
  bool disagrees_with_prediction = false;

  // SHA-256 of the patched function text, or of the raw response when there
  // is no function.
  std::string ContentHash() const;
};

struct GenerationRequest {
  int k = 5;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  int iteration = 1;
  std::optional<std::string> parent_id;
  // Patch ids are "p<first_patch_number + call index>".
  int first_patch_number = 1;
};

struct GenerationError {
  std::string patch_id;  // id the call would have produced
  std::string message;
};

struct GenerationResult {
  std::vector<CandidatePatch> candidates;
  std::vector<GenerationError> errors;
  int backend_calls = 0;
  int disagreements = 0;
};

// Issues k sequential backend calls. Backend errors are recorded per call;
// throws Error(kAllCallsFailed) when every call fails.
GenerationResult GenerateCandidates(const PromptBundle &prompt,
                                    const FunctionSnapshot &base,
                                    const LocationSequence &predicted,
                                    GeneratorBackend &backend,
                                    const GenerationRequest &request);

// First fenced code block, else the longest brace-balanced region. Strips
// "N: " line-number prefixes when every non-blank line carries one. Throws
// Error(kNoCodeFound).
FunctionSnapshot ExtractFunctionFromResponse(std::string_view text);

// Drops whole-line comments (`// x` or `/* x */`) whose body equals a
// non-blank line of `base`: that is how removed lines come back.
std::vector<std::string> StripShadowComments(
    const std::vector<std::string> &lines,
    const std::vector<std::string> &base, int *stripped = nullptr);

// Copies the program into <workdir>/program and replaces the localized
// function's file region with `patched_function`. `workdir` must be absent
// or empty. Throws Error(kIoFailure).
ProgramVariant ApplyPatch(const SourceProgram &program,
                          const LocalizationResult &localization,
                          const FunctionSnapshot &patched_function,
                          const std::filesystem::path &workdir,
                          std::string patch_id = {});

}  // namespace iterfix

#endif  // ITERFIX_PATCH_GENERATION_H_
