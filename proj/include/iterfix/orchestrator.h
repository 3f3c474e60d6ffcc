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

// The iterative repair loop: generate, verify, assess, pool, pick the best
// failing patch as the next base, until a plausible patch shows up or the
// iteration budget runs out.

#ifndef ITERFIX_ORCHESTRATOR_H_
#define ITERFIX_ORCHESTRATOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iterfix/backend.h"
#include "iterfix/corpus_model.h"
#include "iterfix/patch_generation.h"
#include "iterfix/trace_assessment.h"
#include "iterfix/verification.h"

namespace iterfix {

enum class PoolInsertStatus { kInserted, kDuplicate, kRejected };

std::string_view PoolInsertStatusName(PoolInsertStatus status);

struct PoolInsertResult {
  PoolInsertStatus status;
  std::string reason;
};

// True when `a` outranks `b`: higher fitness, then fewer changed lines,
// then the lexicographically smaller patch id, then content hash.
bool RanksBefore(const AssessedPatch &a, const AssessedPatch &b);

// Failing patches keyed by content hash. A popped hash stays blacklisted.
class FailingPatchPool {
 public:
  // Timeout and new-vulnerability patches are rejected; known or popped
  // hashes are duplicates.
  PoolInsertResult Insert(AssessedPatch patch);
  std::optional<AssessedPatch> PopBest();

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool Blacklisted(const std::string &hash) const {
    return popped_.count(hash) > 0;
  }
  // Entries in rank order.
  std::vector<AssessedPatch> Ranked() const;

 private:
  std::map<std::string, AssessedPatch> entries_;
  std::set<std::string> popped_;
};

struct RunConfig {
  int num_iterations = 3;
  int candidates_per_iteration = 5;
  std::uint64_t seed = 0;
  double generation_temperature = 0.7;
  double prediction_temperature = 0.0;
  int prediction_retries = 2;
  int few_shot_count = 2;
  std::size_t log_excerpt_limit = 8 * 1024;
  // Runs land in <runs_dir>/<task_id>/<UTC timestamp>/ unless run_dir is
  // set, in which case that (empty or absent) directory is used.
  std::filesystem::path runs_dir = "runs";
  std::optional<std::filesystem::path> run_dir;

  // Throws Error(kConfigError).
  void Validate() const;
  // num_iterations * (k + 1 + prediction_retries).
  int BackendCallBound() const;
};

struct CandidateRecord {
  std::string patch_id;
  std::optional<std::string> parent_id;
  std::string content_hash;
  std::string outcome;  // CategoryName
  std::string summary;
  std::optional<double> fitness;
  std::optional<int> changed_lines;
  // "plausible", "pooled", "duplicate", or "discarded"
  std::string disposition;
  std::string reason;
  bool disagrees_with_prediction = false;
  std::string response_path;
  std::string diff_path;
  std::string trace_path;
};

struct IterationRecord {
  int iteration = 1;
  std::optional<std::string> parent_id;
  std::optional<double> parent_fitness;
  std::vector<HunkLocation> vulnerable_hunks;
  std::string predicted_sequence;
  bool prediction_fallback = false;
  int prediction_calls = 0;
  std::string prediction_prompt_digest;
  std::string prompt_digest;
  std::string prompt_path;
  std::vector<GenerationError> generation_errors;
  std::vector<CandidateRecord> candidates;
};

struct PoolEntryRecord {
  std::string patch_id;
  int iteration = 1;
  double fitness = 0;
  int changed_lines = 0;
};

struct RepairReport {
  enum class Status { kPlausible, kExhausted };

  std::string task_id;
  std::string cwe_id;
  Status status = Status::kExhausted;
  std::optional<std::string> plausible_patch_id;
  std::optional<int> plausible_iteration;
  std::optional<std::string> patched_function;
  std::string exhausted_reason;
  RunConfig config;
  std::vector<std::string> few_shot_sequences;
  std::vector<IterationRecord> iterations;
  int backend_calls = 0;
  std::vector<PoolEntryRecord> pool_remaining;
  // Stage name -> seconds. Kept out of the report file.
  std::map<std::string, double> timings;
};

std::string_view StatusName(RepairReport::Status status);

struct RunOutcome {
  RepairReport report;
  std::filesystem::path run_dir;
};

// Timing-free JSON rendering; identical runs give identical text.
std::string ReportJson(const RepairReport &report);

// Whole-function unified diff in file coordinates.
std::string FunctionDiff(const FunctionSnapshot &original,
                         const FunctionSnapshot &patched);

// Throws Error(kSanityCheckFailed) when the unpatched program does not fail
// its PoVs, Error(kAllCallsFailed) / Error(kBackendError) when iteration 1
// cannot get any response, plus the setup errors of the modules below.
RunOutcome RunRepair(const RepairTask &task, const RunConfig &config,
                     const ExampleBank &bank, GeneratorBackend &backend,
                     TraceProvider &provider,
                     const FitnessFunction &fitness = TscFitness());

}  // namespace iterfix

#endif  // ITERFIX_ORCHESTRATOR_H_
