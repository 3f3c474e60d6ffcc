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

#include "iterfix/cli.h"

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <system_error>

#include "CLI11.hpp"
#include "iterfix/error.h"
#include "iterfix/hunk_diff.h"
#include "iterfix/taint_trace.h"
#include "iterfix/text.h"
#include "json.hpp"

namespace iterfix {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void CliConfig::Validate() const {
  run.Validate();
  if (backend != "scripted" && backend != "live") {
    throw Error(ErrorCode::kConfigError,
                "backend must be 'scripted' or 'live', got '" + backend + "'",
                "backend");
  }
  if (provider != "fixture" && provider != "external") {
    throw Error(ErrorCode::kConfigError,
                "provider must be 'fixture' or 'external', got '" + provider +
                    "'",
                "provider");
  }
  if (provider == "external" && Trim(external_trace_cmd).empty()) {
    throw Error(ErrorCode::kConfigError,
                "the external provider needs --external-trace-cmd",
                "external_trace_cmd");
  }
  if (backend == "live" && (live.endpoint.empty() || live.model.empty())) {
    throw Error(ErrorCode::kConfigError,
                std::string("the live backend needs an endpoint and a model (") +
                    kEnvEndpoint + ", " + kEnvModel + ")",
                "backend");
  }
}

namespace {

template <typename T>
T ConfigValue(const nlohmann::json &value, const std::string &key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception &) {
    throw Error(ErrorCode::kConfigError, "bad value for config key " + key,
                key);
  }
}

}  // namespace

void ApplyConfigFile(const fs::path &path, CliConfig &config) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error &e) {
    throw Error(ErrorCode::kConfigError, e.what(), path.string());
  }
  const nlohmann::json root =
      nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorCode::kConfigError, "config is not a JSON object",
                path.string());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string &p) {
    const fs::path raw(p);
    return raw.is_absolute() ? raw : base / raw;
  };
  for (const auto &[key, value] : root.items()) {
    RunConfig &run = config.run;
    if (key == "iterations") {
      run.num_iterations = ConfigValue<int>(value, key);
    } else if (key == "candidates") {
      run.candidates_per_iteration = ConfigValue<int>(value, key);
    } else if (key == "seed") {
      run.seed = ConfigValue<std::uint64_t>(value, key);
    } else if (key == "generation_temperature") {
      run.generation_temperature = ConfigValue<double>(value, key);
    } else if (key == "prediction_temperature") {
      run.prediction_temperature = ConfigValue<double>(value, key);
    } else if (key == "prediction_retries") {
      run.prediction_retries = ConfigValue<int>(value, key);
    } else if (key == "few_shot_count") {
      run.few_shot_count = ConfigValue<int>(value, key);
    } else if (key == "log_excerpt_limit") {
      run.log_excerpt_limit = ConfigValue<std::size_t>(value, key);
    } else if (key == "runs_dir") {
      run.runs_dir = resolve(ConfigValue<std::string>(value, key));
    } else if (key == "backend") {
      config.backend = ConfigValue<std::string>(value, key);
    } else if (key == "responses_dir") {
      config.responses_dir = resolve(ConfigValue<std::string>(value, key));
    } else if (key == "provider") {
      config.provider = ConfigValue<std::string>(value, key);
    } else if (key == "external_trace_cmd") {
      config.external_trace_cmd = ConfigValue<std::string>(value, key);
    } else if (key == "example_bank") {
      config.example_bank = resolve(ConfigValue<std::string>(value, key));
    } else if (key == "endpoint") {
      config.live.endpoint = ConfigValue<std::string>(value, key);
    } else if (key == "model") {
      config.live.model = ConfigValue<std::string>(value, key);
    } else if (key == "backend_timeout_s") {
      config.live.timeout_s = ConfigValue<double>(value, key);
    } else if (key == "api_key") {
      throw Error(ErrorCode::kConfigError,
                  std::string("API keys are read from ") + kEnvApiKey +
                      " only, never from config files",
                  key);
    } else {
      throw Error(ErrorCode::kConfigError, "unknown config key '" + key + "'",
                  key);
    }
  }
}

void ApplyEnvironment(const std::map<std::string, std::string> &env,
                      CliConfig &config) {
  if (auto it = env.find(kEnvEndpoint); it != env.end())
    config.live.endpoint = it->second;
  if (auto it = env.find(kEnvModel); it != env.end())
    config.live.model = it->second;
  if (auto it = env.find(kEnvApiKey); it != env.end())
    config.live.api_key = it->second;
}

namespace {

std::map<std::string, std::string> ProcessEnvironment() {
  std::map<std::string, std::string> env;
  for (const char *name : {kEnvEndpoint, kEnvModel, kEnvApiKey}) {
    if (const char *value = std::getenv(name)) env[name] = value;
  }
  return env;
}

struct RepairFlags {
  std::string task;
  std::optional<std::string> config;
  std::optional<std::string> backend;
  std::optional<std::string> responses_dir;
  std::optional<int> iterations;
  std::optional<int> candidates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> provider;
  std::optional<std::string> external_trace_cmd;
  std::optional<std::string> bank;
  std::optional<std::string> runs_dir;
  std::optional<std::string> run_dir;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  bool json = false;
};

fs::path FindBank(const CliConfig &config, const fs::path &task_dir) {
  if (config.example_bank) return *config.example_bank;
  for (const fs::path &candidate :
       {task_dir / "example_bank.json",
        task_dir.parent_path() / "example_bank.json"}) {
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  throw Error(ErrorCode::kMissingFile,
              "no example bank: pass --bank or put example_bank.json next to "
              "the task",
              "example_bank");
}

int CmdRepair(const RepairFlags &flags, std::ostream &out) {
  CliConfig config;
  if (flags.config) ApplyConfigFile(*flags.config, config);
  ApplyEnvironment(ProcessEnvironment(), config);
  if (flags.backend) config.backend = *flags.backend;
  if (flags.responses_dir) config.responses_dir = *flags.responses_dir;
  if (flags.iterations) config.run.num_iterations = *flags.iterations;
  if (flags.candidates) config.run.candidates_per_iteration = *flags.candidates;
  if (flags.seed) config.run.seed = *flags.seed;
  if (flags.provider) config.provider = *flags.provider;
  if (flags.external_trace_cmd)
    config.external_trace_cmd = *flags.external_trace_cmd;
  if (flags.bank) config.example_bank = *flags.bank;
  if (flags.runs_dir) config.run.runs_dir = *flags.runs_dir;
  if (flags.run_dir) config.run.run_dir = *flags.run_dir;
  if (flags.endpoint) config.live.endpoint = *flags.endpoint;
  if (flags.model) config.live.model = *flags.model;
  config.Validate();

  const RepairTask task = LoadTask(flags.task);
  const ExampleBank bank = ExampleBank::Load(FindBank(config, task.task_dir));

  std::unique_ptr<GeneratorBackend> backend;
  if (config.backend == "live") {
    backend = std::make_unique<LiveBackend>(config.live);
  } else {
    backend = std::make_unique<ScriptedBackend>(
        config.responses_dir.value_or(task.task_dir / "responses"));
  }
  std::unique_ptr<TraceProvider> provider;
  if (config.provider == "external") {
    provider =
        std::make_unique<ExternalCommandTraceProvider>(config.external_trace_cmd);
  } else {
    provider = std::make_unique<FixtureTraceProvider>();
  }

  const RunOutcome run =
      RunRepair(task, config.run, bank, *backend, *provider);
  const RepairReport &r = run.report;
  const fs::path report_path = run.run_dir / "report.json";
  const bool plausible = r.status == RepairReport::Status::kPlausible;
  if (flags.json) {
    Json j = {{"task_id", r.task_id},
              {"status", StatusName(r.status)},
              {"iteration", plausible ? Json(*r.plausible_iteration) : Json()},
              {"patch_id", plausible ? Json(*r.plausible_patch_id) : Json()},
              {"backend_calls", r.backend_calls},
              {"report", report_path.string()}};
    out << j.dump() << "\n";
  } else {
    if (plausible) {
      out << r.task_id << ": plausible at iteration " << *r.plausible_iteration
          << " (" << *r.plausible_patch_id << ")\n";
    } else {
      out << r.task_id << ": exhausted after " << r.iterations.size()
          << " iteration(s): " << r.exhausted_reason << "\n";
    }
    out << "report: " << report_path.string() << "\n";
  }
  return plausible ? kExitOk : kExitExhausted;
}

struct Range {
  int start = 0;
  int end = 0;
};

Range ParseRange(const std::string &text, const std::string &flag) {
  const std::size_t colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int a = std::stoi(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(text);
    const std::string rest = text.substr(colon + 1);
    const int b = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error &) {
    throw Error(ErrorCode::kConfigError,
                flag + " expects a:b, got '" + text + "'", flag);
  }
}

std::vector<std::string> Slice(const std::vector<std::string> &lines,
                               const Range &range, const std::string &what) {
  if (range.start < 1 || range.end < range.start ||
      range.end > static_cast<int>(lines.size())) {
    throw Error(ErrorCode::kRangeOutOfFile,
                "range " + std::to_string(range.start) + ":" +
                    std::to_string(range.end) + " outside " + what + " (" +
                    std::to_string(lines.size()) + " lines)",
                what);
  }
  return {lines.begin() + (range.start - 1), lines.begin() + range.end};
}

int CmdDiffHunks(const std::string &old_path, const std::string &new_path,
                 const std::optional<std::string> &old_range,
                 const std::optional<std::string> &new_range, bool json,
                 std::ostream &out) {
  std::vector<std::string> old_lines = SplitLines(ReadFile(old_path)).lines;
  std::vector<std::string> new_lines = SplitLines(ReadFile(new_path)).lines;
  if (old_range) {
    const Range o = ParseRange(*old_range, "--function-range");
    Range n;
    if (new_range) {
      n = ParseRange(*new_range, "--new-function-range");
    } else {
      n = {o.start, o.end + static_cast<int>(new_lines.size()) -
                        static_cast<int>(old_lines.size())};
    }
    old_lines = Slice(old_lines, o, old_path);
    new_lines = Slice(new_lines, n, new_path);
  } else if (new_range) {
    new_lines = Slice(new_lines, ParseRange(*new_range, "--new-function-range"),
                      new_path);
  }
  const HunkDiff diff = ComputeHunks(old_lines, new_lines);
  const int n = static_cast<int>(old_lines.size());
  const std::string seq = SerializeSequence(ToLocationSequence(diff, n));
  const HunkVerdict verdict = ClassifyMultiHunk(old_lines, new_lines);
  if (json) {
    Json j = {{"sequence", seq},
              {"verdict", VerdictName(verdict)},
              {"regions", CountEditRegions(diff)},
              {"removed_lines", diff.RemovedLines()},
              {"inserted_lines", diff.InsertedLines()}};
    out << j.dump() << "\n";
  } else {
    out << seq << "\n" << VerdictName(verdict) << "\n";
  }
  return kExitOk;
}

int CmdAssess(const std::string &original_path,
              const std::string &patched_path, std::ostream &out) {
  const TaintTrace original = ParseTraceLog(ReadFile(original_path));
  const TaintTrace patched = ParseTraceLog(ReadFile(patched_path));
  Json j = {{"tsc", TaintStatementCoverage(patched)},
            {"new_vuln", IntroducesNewVulnerability(original, patched)}};
  out << j.dump() << "\n";
  return kExitOk;
}

fs::path FindStem(const fs::path &dir, const std::string &stem) {
  std::vector<fs::path> found;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().stem() == stem) {
      found.push_back(entry.path());
    }
  }
  if (found.size() != 1) {
    throw Error(ErrorCode::kMissingFile,
                "pair " + dir.filename().string() + " needs exactly one '" +
                    stem + ".*' file",
                dir.string());
  }
  return found.front();
}

int CmdStats(const std::string &pairs_dir, bool json, std::ostream &out) {
  std::error_code ec;
  if (!fs::is_directory(pairs_dir, ec)) {
    throw Error(ErrorCode::kMissingFile, "no such corpus directory",
                pairs_dir);
  }
  std::vector<fs::path> pairs;
  for (const auto &entry : fs::directory_iterator(pairs_dir)) {
    if (entry.is_directory()) pairs.push_back(entry.path());
  }
  std::sort(pairs.begin(), pairs.end());
  int unchanged = 0, single = 0, multi = 0;
  for (const fs::path &pair : pairs) {
    const auto old_lines = SplitLines(ReadFile(FindStem(pair, "old"))).lines;
    const auto new_lines = SplitLines(ReadFile(FindStem(pair, "new"))).lines;
    switch (ClassifyMultiHunk(old_lines, new_lines)) {
      case HunkVerdict::kUnchanged: ++unchanged; break;
      case HunkVerdict::kSingleHunk: ++single; break;
      case HunkVerdict::kMultiHunk: ++multi; break;
    }
  }
  std::string percentage = "n/a";
  if (single + multi > 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%",
                  100.0 * multi / static_cast<double>(single + multi));
    percentage = buf;
  }
  if (json) {
    Json j = {{"total", pairs.size()},
              {"unchanged", unchanged},
              {"single_hunk", single},
              {"multi_hunk", multi},
              {"multi_hunk_percentage", percentage}};
    out << j.dump() << "\n";
  } else {
    out << "pairs: " << pairs.size() << "\n"
        << "unchanged: " << unchanged << "\n"
        << "single_hunk: " << single << "\n"
        << "multi_hunk: " << multi << "\n"
        << "multi_hunk_percentage: " << percentage << "\n";
  }
  return kExitOk;
}

std::string FitnessText(const nlohmann::json &value) {
  if (value.is_null()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", value.get<double>());
  return buf;
}

int CmdReport(const std::string &path, bool json, std::ostream &out) {
  fs::path file = path;
  std::error_code ec;
  if (fs::is_directory(file, ec)) file /= "report.json";
  const std::string text = ReadFile(file);
  if (json) {
    out << text;
    return kExitOk;
  }
  const nlohmann::json r =
      nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (r.is_discarded() || !r.is_object() || !r.contains("iterations")) {
    throw Error(ErrorCode::kSchemaViolation, "not a repair report",
                file.string());
  }
  out << r.value("task_id", "?") << ": " << r.value("status", "?");
  if (r.value("status", "") == "plausible") {
    out << " (" << r["plausible_patch_id"].get<std::string>() << ", iteration "
        << r["plausible_iteration"].get<int>() << ")";
  } else {
    out << " (" << r.value("exhausted_reason", "") << ")";
  }
  out << "\nbackend calls: " << r.value("backend_calls", 0) << " of at most "
      << r.value("backend_call_bound", 0) << "\n";
  for (const auto &it : r["iterations"]) {
    out << "iteration " << it.value("iteration", 0) << " parent "
        << (it["parent_id"].is_null() ? std::string("-")
                                      : it["parent_id"].get<std::string>())
        << " predicted " << it.value("predicted_sequence", "")
        << (it.value("prediction_fallback", false) ? " (fallback)" : "")
        << "\n";
    for (const auto &c : it["candidates"]) {
      out << "  " << c.value("patch_id", "?") << "  "
          << c.value("outcome", "?") << "  fitness "
          << FitnessText(c["fitness"]) << "  " << c.value("disposition", "");
      const std::string reason = c.value("reason", "");
      if (!reason.empty()) out << " (" << reason << ")";
      out << "\n";
    }
    for (const auto &e : it["generation_errors"]) {
      out << "  " << e.value("patch_id", "?") << "  backend error: "
          << e.value("message", "") << "\n";
    }
  }
  out << "pool remaining: " << r["pool_remaining"].size() << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Iterative, location-aware vulnerability repair",
               args.empty() ? "iterfix" : args.front()};
  app.require_subcommand(1);

  RepairFlags repair;
  CLI::App *repair_cmd =
      app.add_subcommand("repair", "Run the iterative repair loop on a task");
  repair_cmd->add_option("--task", repair.task, "Task directory")->required();
  repair_cmd->add_option("--config", repair.config, "JSON config file");
  repair_cmd->add_option("--backend", repair.backend, "scripted or live");
  repair_cmd->add_option("--responses-dir", repair.responses_dir,
                         "Scripted responses (default <task>/responses)");
  repair_cmd->add_option("--iterations", repair.iterations,
                         "Iteration budget (default 3)");
  repair_cmd->add_option("--candidates", repair.candidates,
                         "Candidates per iteration (default 5)");
  repair_cmd->add_option("--seed", repair.seed, "Seed for sampling");
  repair_cmd->add_option("--provider", repair.provider, "fixture or external");
  repair_cmd->add_option("--external-trace-cmd", repair.external_trace_cmd,
                         "Trace command for the external provider");
  repair_cmd->add_option("--bank", repair.bank, "Few-shot example bank");
  repair_cmd->add_option("--runs-dir", repair.runs_dir,
                         "Root for run directories (default runs)");
  repair_cmd->add_option("--run-dir", repair.run_dir,
                         "Exact (empty) run directory to use");
  repair_cmd->add_option("--endpoint", repair.endpoint,
                         "Chat-completions URL for the live backend");
  repair_cmd->add_option("--model", repair.model, "Model for the live backend");
  repair_cmd->add_flag("--json", repair.json, "Machine-readable output");

  std::string old_file, new_file;
  std::optional<std::string> old_range, new_range;
  bool diff_json = false;
  CLI::App *diff_cmd = app.add_subcommand(
      "diff-hunks", "Location sequence and hunk verdict for two files");
  diff_cmd->add_option("old", old_file)->required();
  diff_cmd->add_option("new", new_file)->required();
  diff_cmd->add_option("--function-range", old_range,
                       "a:b line range of the function in the old file");
  diff_cmd->add_option("--new-function-range", new_range,
                       "a:b line range in the new file");
  diff_cmd->add_flag("--json", diff_json);

  std::string original_log, patched_log;
  CLI::App *assess_cmd = app.add_subcommand(
      "assess", "Coverage and new-vulnerability verdict for two trace logs");
  assess_cmd->add_option("--original", original_log)->required();
  assess_cmd->add_option("--patched", patched_log)->required();
  bool assess_json = true;
  assess_cmd->add_flag("--json", assess_json, "Accepted; output is JSON");

  std::string pairs_dir;
  bool stats_json = false;
  CLI::App *stats_cmd =
      app.add_subcommand("stats", "Multi-hunk statistics over a pair corpus");
  stats_cmd->add_option("pairs", pairs_dir)->required();
  stats_cmd->add_flag("--json", stats_json);

  std::string report_path;
  bool report_json = false;
  CLI::App *report_cmd =
      app.add_subcommand("report", "Summarize a run directory or report.json");
  report_cmd->add_option("path", report_path)->required();
  report_cmd->add_flag("--json", report_json);

  std::vector<const char *> argv;
  for (const std::string &a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("iterfix");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*repair_cmd) return CmdRepair(repair, out);
    if (*diff_cmd)
      return CmdDiffHunks(old_file, new_file, old_range, new_range, diff_json,
                          out);
    if (*assess_cmd) return CmdAssess(original_log, patched_log, out);
    if (*stats_cmd) return CmdStats(pairs_dir, stats_json, out);
    if (*report_cmd) return CmdReport(report_path, report_json, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace iterfix
