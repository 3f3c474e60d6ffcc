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

#include "iterfix/patch_generation.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <system_error>
#include <utility>

#include "iterfix/error.h"
#include "iterfix/text.h"
#include "json_util.h"

namespace iterfix {

namespace fs = std::filesystem;
using internal::Json;

namespace {

constexpr std::size_t kExcerptLimit = 4096;

std::string HunkList(const std::vector<HunkLocation> &hunks) {
  std::string out;
  for (const HunkLocation &h : hunks) {
    if (!out.empty()) out += ", ";
    out += h.ToString();
  }
  return out;
}

void RequireHunksWithin(const std::vector<HunkLocation> &hunks, int n) {
  for (const HunkLocation &h : hunks) {
    if (!h.Within(n)) {
      throw Error(ErrorCode::kAnchorOutOfRange,
                  "hunk " + h.ToString() + " outside a " + std::to_string(n) +
                      "-line function",
                  h.ToString());
    }
  }
}

std::vector<std::string> BodyLines(const Json &value, const std::string &ctx) {
  if (value.is_string()) {
    std::vector<std::string> lines =
        SplitLines(value.get<std::string>()).lines;
    if (lines.empty()) internal::SchemaError(ctx, "must not be empty");
    return lines;
  }
  if (value.is_array() && !value.empty()) {
    std::vector<std::string> lines;
    for (const Json &line : value) {
      if (!line.is_string()) internal::SchemaError(ctx, "expected strings");
      lines.push_back(line.get<std::string>());
    }
    return lines;
  }
  internal::SchemaError(ctx, "expected a string or a non-empty array");
}

// Partial Fisher-Yates: moves `take` random picks to the front of `pool`.
void Shuffle(std::vector<std::size_t> &pool, std::size_t take,
             std::mt19937_64 &rng) {
  for (std::size_t i = 0; i < take && i + 1 < pool.size(); ++i) {
    const std::size_t j = i + rng() % (pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
}

std::string FencedBlock(const std::string &body) {
  std::string out = "```c\n" + body;
  if (!out.empty() && out.back() != '\n') out += '\n';
  return out + "```\n";
}

std::string Excerpt(std::string_view text) {
  if (text.size() <= kExcerptLimit) return std::string(text);
  return std::string(text.substr(0, kExcerptLimit)) + "\n[...]\n";
}

// Strips "N: " (optionally space padded) from every line when each non-blank
// line carries such a prefix.
std::vector<std::string> StripLineNumbers(std::vector<std::string> lines) {
  auto prefix_length = [](const std::string &line) -> std::size_t {
    std::size_t i = 0;
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])))
      ++i;
    if (i == digits || i >= line.size() || line[i] != ':') return 0;
    ++i;
    if (i < line.size() && line[i] == ' ') ++i;
    return i;
  };
  bool any = false;
  for (const std::string &line : lines) {
    if (Trim(line).empty()) continue;
    if (prefix_length(line) == 0) return lines;
    any = true;
  }
  if (!any) return lines;
  for (std::string &line : lines) {
    if (!Trim(line).empty()) line.erase(0, prefix_length(line));
  }
  return lines;
}

std::optional<std::vector<std::string>> FirstFencedBlock(
    const std::vector<std::string> &lines) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!StartsWith(Trim(lines[i]), "```")) continue;
    std::vector<std::string> body;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (StartsWith(Trim(lines[j]), "```")) return body;
      body.push_back(lines[j]);
    }
    return body;  // unterminated fence runs to the end
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> LongestBraceRegion(
    const std::vector<std::string> &lines) {
  std::size_t best_begin = 0, best_end = 0, best_chars = 0;
  int depth = 0;
  std::size_t open_line = 0, open_chars = 0, chars = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (char c : lines[i]) {
      ++chars;
      if (c == '{') {
        if (depth++ == 0) {
          open_line = i;
          open_chars = chars;
        }
      } else if (c == '}' && depth > 0) {
        if (--depth == 0 && chars - open_chars > best_chars) {
          best_chars = chars - open_chars;
          best_begin = open_line;
          best_end = i + 1;
        }
      }
    }
    ++chars;
  }
  if (best_end == 0) return std::nullopt;
  // K&R-less style: the signature sits on the line above a lone brace.
  if (best_begin > 0 && StartsWith(Trim(lines[best_begin]), "{") &&
      !Trim(lines[best_begin - 1]).empty()) {
    --best_begin;
  }
  return std::vector<std::string>(lines.begin() + best_begin,
                                  lines.begin() + best_end);
}

void TrimBlankEdges(std::vector<std::string> &lines) {
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  auto first = std::find_if(lines.begin(), lines.end(), [](const auto &l) {
    return !Trim(l).empty();
  });
  lines.erase(lines.begin(), first);
}

std::string BlockHeader(const std::string &title, const std::string &cwe,
                        const FunctionSnapshot &fn) {
  std::string out = "### " + title + " (" + cwe + ")\n";
  out += "Vulnerable function:\n";
  out += FencedBlock(fn.Numbered());
  return out;
}

PromptBundle Bundle(std::string_view system,
                    std::vector<PromptSection> sections) {
  PromptBundle bundle;
  bundle.system_message = std::string(system);
  for (const PromptSection &s : sections) bundle.user_message += s.text;
  bundle.digest = Sha256Hex(bundle.user_message);
  bundle.sections = std::move(sections);
  return bundle;
}

}  // namespace

FewShotExample FewShotExample::FromPair(
    std::string cwe_id, FunctionSnapshot vulnerable, FunctionSnapshot patch,
    std::optional<std::vector<HunkLocation>> hunks) {
  const HunkDiff diff = ComputeHunks(vulnerable, patch);
  if (diff.empty()) {
    throw Error(ErrorCode::kInvariantViolation,
                "few-shot pair has no changes", cwe_id);
  }
  std::vector<HunkLocation> regions =
      hunks ? std::move(*hunks) : EditRegions(diff, vulnerable.size());
  RequireHunksWithin(regions, vulnerable.size());
  LocationSequence seq = ToLocationSequence(diff, vulnerable.size());
  return FewShotExample{std::move(cwe_id), std::move(vulnerable),
                        std::move(patch), std::move(regions), std::move(seq)};
}

ExampleBank::ExampleBank(std::string provenance,
                         std::vector<FewShotExample> examples)
    : provenance_(std::move(provenance)), examples_(std::move(examples)) {}

ExampleBank ExampleBank::Load(const fs::path &path) {
  const Json root = internal::ReadJsonFile(path, "example_bank");
  if (!root.is_object()) internal::SchemaError("example_bank", "not an object");
  const std::string provenance =
      internal::RequireString(root, "provenance", "example_bank");
  const Json &list = internal::RequireField(root, "examples", "example_bank");
  if (!list.is_array()) internal::SchemaError("examples", "expected an array");

  std::vector<FewShotExample> examples;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = "examples[" + std::to_string(i) + "]";
    const Json &entry = list[i];
    if (!entry.is_object()) internal::SchemaError(ctx, "not an object");
    const std::string cwe = internal::RequireString(entry, "cwe_id", ctx);
    const std::string name = entry.value("function_name", std::string("f"));
    FunctionSnapshot vulnerable(
        "", name, 1,
        BodyLines(internal::RequireField(entry, "vulnerable_function", ctx),
                  ctx + ".vulnerable_function"));
    FunctionSnapshot patch(
        "", name, 1,
        BodyLines(internal::RequireField(entry, "patch_function", ctx),
                  ctx + ".patch_function"));
    std::optional<std::vector<HunkLocation>> hunks;
    if (entry.contains("vulnerable_hunks")) {
      const Json &arr = entry["vulnerable_hunks"];
      if (!arr.is_array()) {
        internal::SchemaError(ctx + ".vulnerable_hunks", "expected an array");
      }
      hunks.emplace();
      for (const Json &h : arr) {
        if (!h.is_object())
          internal::SchemaError(ctx + ".vulnerable_hunks", "not an object");
        hunks->push_back(
            {internal::RequireInt(h, "start", ctx + ".vulnerable_hunks"),
             internal::RequireInt(h, "end", ctx + ".vulnerable_hunks")});
      }
    }
    FewShotExample ex =
        FewShotExample::FromPair(cwe, vulnerable, patch, std::move(hunks));
    if (entry.contains("ground_truth_sequence")) {
      const std::string stated = internal::RequireString(
          entry, "ground_truth_sequence", ctx);
      if (ParseSequence(stated) != ex.ground_truth_sequence) {
        throw Error(ErrorCode::kInvariantViolation,
                    ctx + ": ground_truth_sequence disagrees with the diff (" +
                        SerializeSequence(ex.ground_truth_sequence) + ")",
                    ctx + ".ground_truth_sequence");
      }
    }
    examples.push_back(std::move(ex));
  }
  return ExampleBank(provenance, std::move(examples));
}

std::vector<FewShotExample> SelectFewShots(const ExampleBank &bank,
                                           const std::string &cwe_id,
                                           int count, std::uint64_t seed) {
  if (count < 1) {
    throw Error(ErrorCode::kInvariantViolation, "count must be positive",
                "count");
  }
  const auto &all = bank.examples();
  if (all.size() < static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::kEmptyBankForCwe,
                "bank holds " + std::to_string(all.size()) +
                    " examples; need " + std::to_string(count),
                cwe_id);
  }
  std::vector<std::size_t> same, other;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (all[i].cwe_id == cwe_id ? same : other).push_back(i);
  }
  std::mt19937_64 rng(seed);
  const std::size_t want = static_cast<std::size_t>(count);
  const std::size_t from_same = std::min(want, same.size());
  Shuffle(same, from_same, rng);
  std::vector<FewShotExample> out;
  for (std::size_t i = 0; i < from_same; ++i) out.push_back(all[same[i]]);
  const std::size_t rest = want - from_same;
  Shuffle(other, rest, rng);
  for (std::size_t i = 0; i < rest; ++i) out.push_back(all[other[i]]);
  return out;
}

PromptBundle BuildLocationPrompt(const RepairTarget &target,
                                 const std::vector<FewShotExample> &shots) {
  std::vector<PromptSection> sections;
  sections.push_back(
      {PromptSection::Kind::kPreamble,
       "Translate each vulnerable function and its vulnerable hunk lines into "
       "a patch hunk location sequence. A plain number keeps that line, [n] "
       "removes line n, and [ADD] marks a place where new lines are "
       "inserted.\n\n"});
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const FewShotExample &ex = shots[i];
    std::string text = BlockHeader("Example " + std::to_string(i + 1),
                                   ex.cwe_id, ex.vulnerable_function);
    text += "Vulnerable hunk lines: " + HunkList(ex.vulnerable_hunks) + "\n";
    text += "Patch hunk location sequence: " +
            SerializeSequence(ex.ground_truth_sequence) + "\n\n";
    sections.push_back({PromptSection::Kind::kFewShot, std::move(text)});
  }
  std::string text = BlockHeader("Target", target.cwe_id, target.function);
  text += "Vulnerable hunk lines: " + HunkList(target.vulnerable_hunks) + "\n";
  text += "Answer with the patch hunk location sequence only, in braces, "
          "covering lines 1 to " +
          std::to_string(target.function.size()) + ".\n";
  sections.push_back({PromptSection::Kind::kTarget, std::move(text)});
  return Bundle(kPredictorRole, std::move(sections));
}

std::optional<LocationSequence> ParsePredictionResponse(
    std::string_view response, int anchor_length) {
  const std::size_t open = response.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  const std::size_t close = response.find('}', open);
  if (close == std::string_view::npos) return std::nullopt;
  try {
    LocationSequence seq =
        ParseSequence(response.substr(open, close - open + 1));
    if (seq.anchor_length() != anchor_length) return std::nullopt;
    return seq;
  } catch (const Error &) {
    return std::nullopt;
  }
}

LocationSequence FallbackSequence(int anchor_length,
                                  const std::vector<HunkLocation> &hunks) {
  RequireHunksWithin(hunks, anchor_length);
  std::set<int> starts;
  for (const HunkLocation &h : hunks) starts.insert(h.start_line);
  std::vector<LocationSequence::Token> tokens;
  for (int line = 1; line <= anchor_length; ++line) {
    if (starts.count(line)) tokens.push_back(LocationSequence::Token::Add());
    tokens.push_back(LocationSequence::Token::Keep(line));
  }
  return LocationSequence(std::move(tokens), anchor_length);
}

LocationPrediction PredictPatchLocations(
    const RepairTarget &target, const std::vector<FewShotExample> &shots,
    GeneratorBackend &backend, const PredictionOptions &options) {
  const int n = target.function.size();
  RequireHunksWithin(target.vulnerable_hunks, n);
  LocationPrediction out;
  out.prompt = BuildLocationPrompt(target, shots);
  const int attempts = 1 + std::max(0, options.retry_budget);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::optional<std::int64_t> seed;
    if (options.seed) seed = *options.seed + attempt;
    std::string response =
        backend.Complete(out.prompt.system_message, out.prompt.user_message,
                         options.temperature, seed);
    ++out.backend_calls;
    std::optional<LocationSequence> parsed =
        ParsePredictionResponse(response, n);
    out.responses.push_back(std::move(response));
    if (parsed) {
      out.sequence = std::move(*parsed);
      return out;
    }
  }
  try {
    out.sequence = FallbackSequence(n, target.vulnerable_hunks);
  } catch (const Error &e) {
    throw Error(ErrorCode::kPredictionUnusable, e.what(), target.function.name());
  }
  out.used_fallback = true;
  return out;
}

PromptBundle BuildPrompt(const RepairTarget &target,
                         const LocationSequence &predicted,
                         const std::vector<FewShotExample> &shots) {
  std::vector<PromptSection> sections;
  sections.push_back(
      {PromptSection::Kind::kPreamble,
       "Each example below repairs a vulnerable C function in three steps. "
       "Step 1 names the vulnerable hunk lines. Step 2 gives the patch hunk "
       "location sequence: a plain number keeps that line, [n] removes line "
       "n, and [ADD] marks where new lines are inserted. Step 3 is the "
       "patched function.\n\n"});
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const FewShotExample &ex = shots[i];
    std::string text = BlockHeader("Example " + std::to_string(i + 1),
                                   ex.cwe_id, ex.vulnerable_function);
    text += "Step 1. Vulnerable hunk lines: " + HunkList(ex.vulnerable_hunks) +
            "\n";
    text += "Step 2. Patch hunk location sequence: " +
            SerializeSequence(ex.ground_truth_sequence) + "\n";
    text += "Step 3. Patched function:\n" +
            FencedBlock(ex.patch_function.Text()) + "\n";
    sections.push_back({PromptSection::Kind::kFewShot, std::move(text)});
  }
  std::string text = BlockHeader("Target", target.cwe_id, target.function);
  if (target.feedback && !target.feedback->empty()) {
    text += "A previous patch of this function still fails:\n" +
            *target.feedback;
    if (text.back() != '\n') text += '\n';
  }
  text += "Step 1. Vulnerable hunk lines: " +
          HunkList(target.vulnerable_hunks) + "\n";
  text += "Step 2. Patch hunk location sequence: " +
          SerializeSequence(predicted) + "\n";
  text += "Step 3. Write the complete patched function in a single ```c "
          "block, without line numbers. Lines to remove may be commented "
          "out.\n";
  sections.push_back({PromptSection::Kind::kTarget, std::move(text)});
  return Bundle(kGeneratorRole, std::move(sections));
}

PromptBundle BuildPrompt(const RepairTask &task,
                         const LocationSequence &predicted,
                         const std::vector<FewShotExample> &shots) {
  RepairTarget target{task.cwe_id, task.localization.function,
                      task.localization.vulnerable_hunks, std::nullopt};
  return BuildPrompt(target, predicted, shots);
}

std::string CandidatePatch::ContentHash() const {
  if (patched_function) return Sha256Hex(patched_function->Text());
  return Sha256Hex("raw:" + raw_response);
}

GenerationResult GenerateCandidates(const PromptBundle &prompt,
                                    const FunctionSnapshot &base,
                                    const LocationSequence &predicted,
                                    GeneratorBackend &backend,
                                    const GenerationRequest &request) {
  if (request.k < 1) {
    throw Error(ErrorCode::kInvariantViolation, "k must be positive", "k");
  }
  GenerationResult out;
  for (int i = 0; i < request.k; ++i) {
    const std::string id =
        "p" + std::to_string(request.first_patch_number + i);
    std::string response;
    ++out.backend_calls;
    try {
      response = backend.Complete(
          prompt.system_message, prompt.user_message, request.temperature,
          static_cast<std::int64_t>(request.seed + static_cast<unsigned>(i)));
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kBackendError) throw;
      out.errors.push_back({id, e.what()});
      continue;
    }
    CandidatePatch patch;
    patch.patch_id = id;
    patch.iteration = request.iteration;
    patch.parent_id = request.parent_id;
    patch.prompt_digest = prompt.digest;
    patch.raw_response_excerpt = Excerpt(response);
    try {
      const FunctionSnapshot extracted = ExtractFunctionFromResponse(response);
      std::vector<std::string> lines =
          StripShadowComments(extracted.lines(), base.lines());
      if (!lines.empty()) {
        patch.patched_function = base.WithLines(std::move(lines));
        const LocationSequence actual = ToLocationSequence(
            ComputeHunks(base, *patch.patched_function), base.size());
        patch.disagrees_with_prediction = !(actual == predicted);
        if (patch.disagrees_with_prediction) ++out.disagreements;
      }
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kNoCodeFound) throw;
    }
    patch.raw_response = std::move(response);
    out.candidates.push_back(std::move(patch));
  }
  if (out.candidates.empty()) {
    throw Error(ErrorCode::kAllCallsFailed,
                "all " + std::to_string(request.k) + " generation calls failed",
                out.errors.empty() ? std::string() : out.errors.front().message);
  }
  return out;
}

FunctionSnapshot ExtractFunctionFromResponse(std::string_view text) {
  const std::vector<std::string> lines = SplitLines(text).lines;
  std::optional<std::vector<std::string>> body = FirstFencedBlock(lines);
  if (body) TrimBlankEdges(*body);
  if (!body || body->empty()) body = LongestBraceRegion(lines);
  if (!body || body->empty()) {
    throw Error(ErrorCode::kNoCodeFound, "response holds no code",
                std::string(text.substr(0, 80)));
  }
  return FunctionSnapshot("", "", 1, StripLineNumbers(std::move(*body)));
}

std::vector<std::string> StripShadowComments(
    const std::vector<std::string> &lines,
    const std::vector<std::string> &base, int *stripped) {
  std::set<std::string, std::less<>> originals;
  for (const std::string &b : base) {
    const std::string_view t = Trim(b);
    if (!t.empty()) originals.emplace(t);
  }
  std::vector<std::string> out;
  int count = 0;
  for (const std::string &line : lines) {
    const std::string_view t = Trim(line);
    std::optional<std::string_view> body;
    if (StartsWith(t, "//")) {
      body = Trim(t.substr(2));
    } else if (StartsWith(t, "/*") && t.size() >= 4 &&
               t.substr(t.size() - 2) == "*/") {
      body = Trim(t.substr(2, t.size() - 4));
    }
    if (body && !body->empty() && !originals.count(t) &&
        originals.count(*body)) {
      ++count;
      continue;
    }
    out.push_back(line);
  }
  if (stripped) *stripped = count;
  return out;
}

ProgramVariant ApplyPatch(const SourceProgram &program,
                          const LocalizationResult &localization,
                          const FunctionSnapshot &patched_function,
                          const fs::path &workdir, std::string patch_id) {
  std::error_code ec;
  if (fs::exists(workdir, ec)) {
    if (!fs::is_directory(workdir, ec) || !fs::is_empty(workdir, ec)) {
      throw Error(ErrorCode::kIoFailure, "workdir is not empty",
                  workdir.string());
    }
  }
  const fs::path root = workdir / "program";
  fs::create_directories(root, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create " + root.string() + ": " + ec.message(),
                workdir.string());
  }
  fs::copy(program.root_path, root,
           fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot copy program: " + ec.message(), root.string());
  }
  const FunctionSnapshot &original = localization.function;
  const fs::path target = root / original.file();
  const SplitText text = SplitLines(ReadFile(target));
  if (original.end_line() > static_cast<int>(text.lines.size())) {
    throw Error(ErrorCode::kRangeOutOfFile,
                "function region outside " + original.file(), original.file());
  }
  std::vector<std::string> lines(text.lines.begin(),
                                 text.lines.begin() + (original.start_line() - 1));
  lines.insert(lines.end(), patched_function.lines().begin(),
               patched_function.lines().end());
  lines.insert(lines.end(), text.lines.begin() + original.end_line(),
               text.lines.end());
  WriteFile(target, JoinLines(lines, text.trailing_newline));
  return ProgramVariant{workdir, std::move(patch_id), program.build_recipe};
}

}  // namespace iterfix
