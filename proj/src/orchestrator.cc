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

#include "iterfix/orchestrator.h"

#include <chrono>
#include <ctime>
#include <future>
#include <system_error>
#include <utility>

#include "iterfix/error.h"
#include "iterfix/hunk_diff.h"
#include "iterfix/text.h"
#include "json.hpp"

namespace iterfix {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string_view PoolInsertStatusName(PoolInsertStatus status) {
  switch (status) {
    case PoolInsertStatus::kInserted: return "inserted";
    case PoolInsertStatus::kDuplicate: return "duplicate";
    case PoolInsertStatus::kRejected: return "rejected";
  }
  return "unknown";
}

bool RanksBefore(const AssessedPatch &a, const AssessedPatch &b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.changed_lines != b.changed_lines)
    return a.changed_lines < b.changed_lines;
  if (a.patch.patch_id != b.patch.patch_id)
    return a.patch.patch_id < b.patch.patch_id;
  return a.content_hash < b.content_hash;
}

PoolInsertResult FailingPatchPool::Insert(AssessedPatch patch) {
  if (patch.outcome.category == VerificationOutcome::Category::kTimeout) {
    return {PoolInsertStatus::kRejected, "timeout"};
  }
  if (patch.outcome.category == VerificationOutcome::Category::kPlausible) {
    return {PoolInsertStatus::kRejected, "plausible"};
  }
  if (patch.introduces_new_vuln) {
    return {PoolInsertStatus::kRejected, "new vulnerability"};
  }
  if (popped_.count(patch.content_hash)) {
    return {PoolInsertStatus::kDuplicate, "already selected as a parent"};
  }
  if (entries_.count(patch.content_hash)) {
    return {PoolInsertStatus::kDuplicate,
            "same as " + entries_.at(patch.content_hash).patch.patch_id};
  }
  std::string hash = patch.content_hash;
  entries_.emplace(std::move(hash), std::move(patch));
  return {PoolInsertStatus::kInserted, {}};
}

std::optional<AssessedPatch> FailingPatchPool::PopBest() {
  if (entries_.empty()) return std::nullopt;
  auto best = entries_.begin();
  for (auto it = std::next(best); it != entries_.end(); ++it) {
    if (RanksBefore(it->second, best->second)) best = it;
  }
  AssessedPatch out = std::move(best->second);
  popped_.insert(best->first);
  entries_.erase(best);
  return out;
}

std::vector<AssessedPatch> FailingPatchPool::Ranked() const {
  std::vector<AssessedPatch> out;
  for (const auto &[hash, patch] : entries_) out.push_back(patch);
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

void RunConfig::Validate() const {
  if (num_iterations < 1) {
    throw Error(ErrorCode::kConfigError, "iterations must be >= 1",
                "iterations");
  }
  if (candidates_per_iteration < 1) {
    throw Error(ErrorCode::kConfigError, "candidates must be >= 1",
                "candidates");
  }
  if (prediction_retries < 0) {
    throw Error(ErrorCode::kConfigError, "prediction retries must be >= 0",
                "prediction_retries");
  }
  if (few_shot_count < 1) {
    throw Error(ErrorCode::kConfigError, "few-shot count must be >= 1",
                "few_shot_count");
  }
  if (generation_temperature < 0 || prediction_temperature < 0) {
    throw Error(ErrorCode::kConfigError, "temperatures must be >= 0",
                "temperature");
  }
}

int RunConfig::BackendCallBound() const {
  return num_iterations * (candidates_per_iteration + 1 + prediction_retries);
}

std::string_view StatusName(RepairReport::Status status) {
  return status == RepairReport::Status::kPlausible ? "plausible"
                                                     : "exhausted";
}

std::string FunctionDiff(const FunctionSnapshot &original,
                         const FunctionSnapshot &patched) {
  const LineAlignment align = AlignLines(original.lines(), patched.lines());
  std::string out = "--- a/" + original.file() + "\n+++ b/" +
                    original.file() + "\n";
  out += "@@ -" + std::to_string(original.start_line()) + "," +
         std::to_string(original.size()) + " +" +
         std::to_string(patched.start_line()) + "," +
         std::to_string(patched.size()) + " @@ " + original.name() + "\n";
  int i = 0, j = 0;
  const int n = original.size(), m = patched.size();
  while (i < n || j < m) {
    if (i < n && align.old_to_new[i] == 0) {
      out += "-" + original.lines()[i++] + "\n";
    } else if (j < m && align.new_to_old[j] == 0) {
      out += "+" + patched.lines()[j++] + "\n";
    } else {
      out += " " + original.lines()[i] + "\n";
      ++i;
      ++j;
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer(std::map<std::string, double> &timings, std::string stage)
      : timings_(timings), stage_(std::move(stage)), start_(Clock::now()) {}
  ~StageTimer() {
    timings_[stage_] +=
        std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  std::map<std::string, double> &timings_;
  std::string stage_;
  Clock::time_point start_;
};

fs::path FreshRunDir(const RunConfig &config, const std::string &task_id) {
  if (config.run_dir) return *config.run_dir;
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const fs::path base = config.runs_dir / task_id;
  fs::path dir = base / stamp;
  for (int n = 2; fs::exists(dir); ++n) {
    dir = base / (std::string(stamp) + "-" + std::to_string(n));
  }
  return dir;
}

void PrepareRunDir(const fs::path &dir) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    throw Error(ErrorCode::kIoFailure, "run directory is not empty",
                dir.string());
  }
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create run directory: " + ec.message(), dir.string());
  }
}

std::string PromptFile(const PromptBundle &prompt) {
  return "=== system ===\n" + prompt.system_message + "\n=== user ===\n" +
         prompt.user_message;
}

std::string Feedback(const AssessedPatch &parent) {
  const VerificationOutcome &o = parent.outcome;
  std::string out = "Result: " + o.Summary() + "\n";
  if (o.category == VerificationOutcome::Category::kFailingPoV) {
    for (std::size_t i = 0; i < o.failed_pov_ids.size(); ++i) {
      out += "PoV " + o.failed_pov_ids[i] + ": " + o.failure_messages[i] + "\n";
    }
  } else if (o.category == VerificationOutcome::Category::kCompileFail) {
    out += "Compiler output:\n" + o.log_excerpt + "\n";
  }
  return out;
}

struct Evaluation {
  VerificationOutcome outcome;
  std::optional<AssessResult> assessment;
};

// Per-candidate work that may run on a worker thread: apply, verify and,
// for failing patches, assess.
Evaluation Evaluate(const RepairTask &task, const CandidatePatch &candidate,
                    const fs::path &workdir, const VerifyOptions &verify,
                    TraceProvider &provider, const FitnessFunction &fitness) {
  Evaluation out;
  if (!candidate.patched_function) {
    out.outcome = VerificationOutcome::CompileFail(
        "no code found in the response");
  } else {
    const ProgramVariant variant =
        ApplyPatch(task.program, task.localization,
                   *candidate.patched_function, workdir, candidate.patch_id);
    out.outcome = Verify(variant, task.povs, verify);
    if (out.outcome.category == VerificationOutcome::Category::kFailingPoV ||
        out.outcome.category == VerificationOutcome::Category::kCompileFail) {
      out.assessment = Assess(
          candidate, out.outcome, provider, variant, task.povs.front(),
          OriginalContext{task.localization.function,
                          task.localization.original_trace},
          fitness);
    }
    return out;
  }
  const ProgramVariant none{workdir, candidate.patch_id,
                            task.program.build_recipe};
  out.assessment = Assess(candidate, out.outcome, provider, none,
                          task.povs.front(),
                          OriginalContext{task.localization.function,
                                          task.localization.original_trace},
                          fitness);
  return out;
}

Json HunksJson(const std::vector<HunkLocation> &hunks) {
  Json out = Json::array();
  for (const HunkLocation &h : hunks) {
    out.push_back({{"start_line", h.start_line}, {"end_line", h.end_line}});
  }
  return out;
}

template <typename T>
Json OptionalJson(const std::optional<T> &value) {
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace

std::string ReportJson(const RepairReport &report) {
  Json root;
  root["task_id"] = report.task_id;
  root["cwe_id"] = report.cwe_id;
  root["status"] = StatusName(report.status);
  root["plausible_patch_id"] = OptionalJson(report.plausible_patch_id);
  root["plausible_iteration"] = OptionalJson(report.plausible_iteration);
  root["patched_function"] = OptionalJson(report.patched_function);
  root["exhausted_reason"] = report.exhausted_reason;
  const RunConfig &c = report.config;
  root["config"] = {{"iterations", c.num_iterations},
                    {"candidates_per_iteration", c.candidates_per_iteration},
                    {"seed", c.seed},
                    {"generation_temperature", c.generation_temperature},
                    {"prediction_temperature", c.prediction_temperature},
                    {"prediction_retries", c.prediction_retries},
                    {"few_shot_count", c.few_shot_count},
                    {"log_excerpt_limit", c.log_excerpt_limit}};
  root["few_shot_sequences"] = report.few_shot_sequences;
  root["backend_calls"] = report.backend_calls;
  root["backend_call_bound"] = c.BackendCallBound();
  Json iterations = Json::array();
  for (const IterationRecord &it : report.iterations) {
    Json rec;
    rec["iteration"] = it.iteration;
    rec["parent_id"] = OptionalJson(it.parent_id);
    rec["parent_fitness"] = OptionalJson(it.parent_fitness);
    rec["vulnerable_hunks"] = HunksJson(it.vulnerable_hunks);
    rec["predicted_sequence"] = it.predicted_sequence;
    rec["prediction_fallback"] = it.prediction_fallback;
    rec["prediction_calls"] = it.prediction_calls;
    rec["prediction_prompt_digest"] = it.prediction_prompt_digest;
    rec["prompt_digest"] = it.prompt_digest;
    rec["prompt_path"] = it.prompt_path;
    Json errors = Json::array();
    for (const GenerationError &e : it.generation_errors) {
      errors.push_back({{"patch_id", e.patch_id}, {"message", e.message}});
    }
    rec["generation_errors"] = std::move(errors);
    Json candidates = Json::array();
    for (const CandidateRecord &r : it.candidates) {
      candidates.push_back({{"patch_id", r.patch_id},
                            {"parent_id", OptionalJson(r.parent_id)},
                            {"content_hash", r.content_hash},
                            {"outcome", r.outcome},
                            {"summary", r.summary},
                            {"fitness", OptionalJson(r.fitness)},
                            {"changed_lines", OptionalJson(r.changed_lines)},
                            {"disposition", r.disposition},
                            {"reason", r.reason},
                            {"disagrees_with_prediction",
                             r.disagrees_with_prediction},
                            {"response_path", r.response_path},
                            {"diff_path", r.diff_path},
                            {"trace_path", r.trace_path}});
    }
    rec["candidates"] = std::move(candidates);
    iterations.push_back(std::move(rec));
  }
  root["iterations"] = std::move(iterations);
  Json pool = Json::array();
  for (const PoolEntryRecord &p : report.pool_remaining) {
    pool.push_back({{"patch_id", p.patch_id},
                    {"iteration", p.iteration},
                    {"fitness", p.fitness},
                    {"changed_lines", p.changed_lines}});
  }
  root["pool_remaining"] = std::move(pool);
  return root.dump(2) + "\n";
}

RunOutcome RunRepair(const RepairTask &task, const RunConfig &config,
                     const ExampleBank &bank, GeneratorBackend &backend,
                     TraceProvider &provider, const FitnessFunction &fitness) {
  config.Validate();
  CountingBackend counted(backend);
  RunOutcome run;
  RepairReport &report = run.report;
  report.task_id = task.task_id;
  report.cwe_id = task.cwe_id;
  report.config = config;
  run.run_dir = FreshRunDir(config, task.task_id);
  PrepareRunDir(run.run_dir);
  const fs::path &dir = run.run_dir;

  VerifyOptions verify;
  verify.log_excerpt_limit = config.log_excerpt_limit;

  {
    StageTimer timer(report.timings, "sanity_check");
    const ProgramVariant original =
        ApplyPatch(task.program, task.localization, task.localization.function,
                   dir / "variants" / "original", "original");
    const VerificationOutcome outcome = Verify(original, task.povs, verify);
    if (outcome.category != VerificationOutcome::Category::kFailingPoV) {
      throw Error(ErrorCode::kSanityCheckFailed,
                  "unpatched program " + outcome.Summary(), task.task_id);
    }
  }

  const std::vector<FewShotExample> shots = SelectFewShots(
      bank, task.cwe_id, config.few_shot_count, config.seed);
  for (const FewShotExample &ex : shots) {
    report.few_shot_sequences.push_back(
        ex.cwe_id + " " + SerializeSequence(ex.ground_truth_sequence));
  }

  FailingPatchPool pool;
  const FunctionSnapshot &original_fn = task.localization.function;
  for (int iteration = 1; iteration <= config.num_iterations; ++iteration) {
    IterationRecord rec;
    rec.iteration = iteration;
    const std::string tag = "iter-" + std::to_string(iteration);

    RepairTarget target{task.cwe_id, original_fn,
                        task.localization.vulnerable_hunks, std::nullopt};
    if (iteration > 1) {
      std::optional<AssessedPatch> parent = pool.PopBest();
      if (!parent) {
        report.exhausted_reason =
            "failing-patch pool empty before iteration " +
            std::to_string(iteration);
        break;
      }
      rec.parent_id = parent->patch.patch_id;
      rec.parent_fitness = parent->fitness;
      if (parent->patch.patched_function) {
        target.function = *parent->patch.patched_function;
        const HunkDiff diff = ComputeHunks(original_fn, target.function);
        target.vulnerable_hunks.clear();
        for (const HunkLocation &h : task.localization.vulnerable_hunks) {
          target.vulnerable_hunks.push_back(
              MapHunk(diff, h, original_fn.size()));
        }
      }
      target.feedback = Feedback(*parent);
    }
    rec.vulnerable_hunks = target.vulnerable_hunks;

    LocationPrediction prediction;
    GenerationResult generated;
    try {
      {
        StageTimer timer(report.timings, "prediction");
        PredictionOptions options;
        options.retry_budget = config.prediction_retries;
        options.temperature = config.prediction_temperature;
        options.seed = static_cast<std::int64_t>(config.seed);
        prediction = PredictPatchLocations(target, shots, counted, options);
      }
      rec.predicted_sequence = SerializeSequence(prediction.sequence);
      rec.prediction_fallback = prediction.used_fallback;
      rec.prediction_calls = prediction.backend_calls;
      rec.prediction_prompt_digest = prediction.prompt.digest;
      WriteFile(dir / "prompts" / (tag + "-predict.txt"),
                PromptFile(prediction.prompt));
      for (std::size_t i = 0; i < prediction.responses.size(); ++i) {
        WriteFile(dir / "responses" /
                      (tag + "-predict-" + std::to_string(i + 1) + ".txt"),
                  prediction.responses[i]);
      }

      const PromptBundle prompt =
          BuildPrompt(target, prediction.sequence, shots);
      rec.prompt_digest = prompt.digest;
      rec.prompt_path = "prompts/" + tag + "-generate.txt";
      WriteFile(dir / rec.prompt_path, PromptFile(prompt));

      StageTimer timer(report.timings, "generation");
      GenerationRequest request;
      request.k = config.candidates_per_iteration;
      request.temperature = config.generation_temperature;
      request.seed = config.seed + static_cast<std::uint64_t>(
                                       (iteration - 1) * request.k);
      request.iteration = iteration;
      request.parent_id = rec.parent_id;
      request.first_patch_number = 1 + (iteration - 1) * request.k;
      generated = GenerateCandidates(prompt, target.function,
                                     prediction.sequence, counted, request);
    } catch (const Error &e) {
      const bool backend = e.code() == ErrorCode::kBackendError ||
                           e.code() == ErrorCode::kAllCallsFailed;
      if (!backend || iteration == 1) throw;
      report.exhausted_reason = "iteration " + std::to_string(iteration) +
                                ": " + e.what();
      report.iterations.push_back(std::move(rec));
      break;
    }
    rec.generation_errors = generated.errors;

    std::vector<Evaluation> evaluations;
    {
      StageTimer timer(report.timings, "verification");
      std::vector<std::future<Evaluation>> futures;
      for (const CandidatePatch &c : generated.candidates) {
        futures.push_back(std::async(std::launch::async, [&, &c = c] {
          return Evaluate(task, c, dir / "variants" / c.patch_id, verify,
                          provider, fitness);
        }));
      }
      for (auto &f : futures) evaluations.push_back(f.get());
    }

    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < generated.candidates.size(); ++i) {
      const CandidatePatch &c = generated.candidates[i];
      Evaluation &ev = evaluations[i];
      CandidateRecord cr;
      cr.patch_id = c.patch_id;
      cr.parent_id = c.parent_id;
      cr.content_hash = c.ContentHash();
      cr.outcome = CategoryName(ev.outcome.category);
      cr.summary = ev.outcome.Summary();
      cr.disagrees_with_prediction = c.disagrees_with_prediction;
      cr.response_path = "responses/" + c.patch_id + ".txt";
      WriteFile(dir / cr.response_path, c.raw_response);
      if (c.patched_function) {
        cr.diff_path = "diffs/" + c.patch_id + ".diff";
        WriteFile(dir / cr.diff_path,
                  FunctionDiff(original_fn, *c.patched_function));
      }
      if (ev.assessment && ev.assessment->trace_log) {
        cr.trace_path = "traces/" + c.patch_id + ".log";
        WriteFile(dir / cr.trace_path, *ev.assessment->trace_log);
      }

      if (ev.outcome.is_plausible()) {
        cr.disposition = "plausible";
        if (!winner) winner = i;
      } else if (ev.outcome.category ==
                 VerificationOutcome::Category::kTimeout) {
        cr.disposition = "discarded";
        cr.reason = "timeout";
      } else if (!ev.assessment || !ev.assessment->assessed) {
        cr.disposition = "discarded";
        cr.reason = ev.assessment ? ev.assessment->discard_reason
                                  : std::string("not assessed");
      } else {
        const AssessedPatch &a = *ev.assessment->assessed;
        cr.fitness = a.fitness;
        cr.changed_lines = a.changed_lines;
        cr.disposition = "assessed";
      }
      rec.candidates.push_back(std::move(cr));
    }

    if (winner) {
      const CandidatePatch &c = generated.candidates[*winner];
      report.status = RepairReport::Status::kPlausible;
      report.plausible_patch_id = c.patch_id;
      report.plausible_iteration = iteration;
      report.patched_function = c.patched_function->Text();
      WriteFile(dir / "plausible.c", c.patched_function->Text());
      for (CandidateRecord &cr : rec.candidates) {
        if (cr.disposition == "assessed") cr.disposition = "not pooled";
      }
      report.iterations.push_back(std::move(rec));
      break;
    }

    for (std::size_t i = 0; i < generated.candidates.size(); ++i) {
      CandidateRecord &cr = rec.candidates[i];
      if (cr.disposition != "assessed") continue;
      const PoolInsertResult inserted =
          pool.Insert(*evaluations[i].assessment->assessed);
      if (inserted.status == PoolInsertStatus::kInserted) {
        cr.disposition = "pooled";
      } else {
        cr.disposition = std::string(PoolInsertStatusName(inserted.status));
        cr.reason = inserted.reason;
      }
    }
    report.iterations.push_back(std::move(rec));
  }

  if (report.status == RepairReport::Status::kExhausted &&
      report.exhausted_reason.empty()) {
    report.exhausted_reason = "iteration budget spent";
  }
  report.backend_calls = counted.calls();
  for (const AssessedPatch &p : pool.Ranked()) {
    report.pool_remaining.push_back({p.patch.patch_id, p.patch.iteration,
                                     p.fitness, p.changed_lines});
  }

  WriteFile(dir / "report.json", ReportJson(report));
  Json timings(report.timings);
  WriteFile(dir / "timings.json", timings.dump(2) + "\n");
  return run;
}

}  // namespace iterfix
