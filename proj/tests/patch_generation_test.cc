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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "iterfix/error.h"
#include "iterfix/text.h"
#include "test_util.h"

namespace iterfix {
namespace {

namespace fs = std::filesystem;
using Lines = std::vector<std::string>;
using testing_util::FixturePath;
using testing_util::TempDir;

constexpr char kCveSequence[] =
    "{1,2,3,4,5,[ADD],6,[7],[ADD],8,9,10,11,12,13,14,15,16,17,18}";

Lines ReadLines(const std::string &rel) {
  return SplitLines(ReadFile(FixturePath(rel))).lines;
}

FunctionSnapshot CveOld() {
  return FunctionSnapshot("src/gif.c", "readextension", 1,
                          ReadLines("pairs/cve-2016-3186/old.c"));
}

FunctionSnapshot CveNew() {
  return FunctionSnapshot("src/gif.c", "readextension", 1,
                          ReadLines("pairs/cve-2016-3186/new.c"));
}

FewShotExample MakeExample(const std::string &cwe, int variant) {
  const std::string tag = std::to_string(variant);
  FunctionSnapshot vuln("", "f" + tag, 1,
                        {"int f" + tag + "(int x)", "{", "    return x;",
                         "}"});
  FunctionSnapshot fix("", "f" + tag, 1,
                       {"int f" + tag + "(int x)", "{",
                        "    if (x < 0) return 0;", "    return x;", "}"});
  return FewShotExample::FromPair(cwe, vuln, fix);
}

ExampleBank MakeBank(const std::map<std::string, int> &per_cwe) {
  std::vector<FewShotExample> examples;
  int variant = 0;
  for (const auto &[cwe, count] : per_cwe) {
    for (int i = 0; i < count; ++i) examples.push_back(MakeExample(cwe, ++variant));
  }
  return ExampleBank("synthetic", std::move(examples));
}

// Writes ordered/<n>.txt (or .error for entries starting with "!").
void Script(const fs::path &dir, const std::vector<std::string> &responses) {
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const bool error = !responses[i].empty() && responses[i][0] == '!';
    WriteFile(dir / "ordered" /
                  (std::to_string(i + 1) + (error ? ".error" : ".txt")),
              error ? responses[i].substr(1) : responses[i]);
  }
}

std::string Fenced(const Lines &lines) {
  return "Here is the fix.\n```c\n" + JoinLines(lines) + "```\nDone.\n";
}

TEST(FewShotTest, GroundTruthMatchesDiff) {
  const FewShotExample ex = FewShotExample::FromPair("CWE-125", CveOld(), CveNew());
  EXPECT_EQ(SerializeSequence(ex.ground_truth_sequence), kCveSequence);
  EXPECT_EQ(ex.ground_truth_sequence,
            ToLocationSequence(ComputeHunks(CveOld(), CveNew()), 18));
  EXPECT_FALSE(ex.vulnerable_hunks.empty());
}

TEST(FewShotTest, IdenticalPairRejected) {
  EXPECT_THROW(FewShotExample::FromPair("CWE-1", CveOld(), CveOld()), Error);
}

TEST(SelectFewShotsTest, SameCweDeterministicAndDistinct) {
  const ExampleBank bank = MakeBank({{"CWE-119", 5}, {"CWE-416", 2}});
  const auto first = SelectFewShots(bank, "CWE-119", 2, 7);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].cwe_id, "CWE-119");
  EXPECT_EQ(first[1].cwe_id, "CWE-119");
  EXPECT_NE(first[0].vulnerable_function, first[1].vulnerable_function);
  const auto again = SelectFewShots(bank, "CWE-119", 2, 7);
  EXPECT_EQ(first[0].vulnerable_function, again[0].vulnerable_function);
  EXPECT_EQ(first[1].vulnerable_function, again[1].vulnerable_function);

  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto &ex : SelectFewShots(bank, "CWE-119", 2, seed)) {
      seen.insert(ex.vulnerable_function.name());
    }
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(SelectFewShotsTest, ExactlyTwoAreForced) {
  const ExampleBank bank = MakeBank({{"CWE-119", 5}, {"CWE-416", 2}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto shots = SelectFewShots(bank, "CWE-416", 2, seed);
    std::set<std::string> names;
    for (const auto &ex : shots) {
      EXPECT_EQ(ex.cwe_id, "CWE-416");
      names.insert(ex.vulnerable_function.name());
    }
    EXPECT_EQ(names, (std::set<std::string>{"f6", "f7"}));
  }
}

TEST(SelectFewShotsTest, FallsBackBankWide) {
  const ExampleBank bank = MakeBank({{"CWE-119", 3}, {"CWE-416", 1}});
  const auto shots = SelectFewShots(bank, "CWE-369", 2, 11);
  ASSERT_EQ(shots.size(), 2u);
  EXPECT_NE(shots[0].vulnerable_function, shots[1].vulnerable_function);

  const auto partial = SelectFewShots(bank, "CWE-416", 2, 11);
  EXPECT_EQ(partial[0].cwe_id, "CWE-416");
  EXPECT_EQ(partial[1].cwe_id, "CWE-119");
}

TEST(SelectFewShotsTest, EmptyBankIsAnError) {
  const ExampleBank bank = MakeBank({{"CWE-119", 1}});
  try {
    SelectFewShots(bank, "CWE-369", 2, 1);
    FAIL() << "expected EmptyBankForCwe";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyBankForCwe);
  }
}

TEST(ExampleBankTest, LoadsStringAndArrayBodies) {
  TempDir dir;
  WriteFile(dir.path() / "bank.json", R"json({
    "provenance": "unit",
    "examples": [
      {"cwe_id": "CWE-369",
       "vulnerable_function": "int d(int a, int b)\n{\n    return a / b;\n}\n",
       "patch_function": ["int d(int a, int b)", "{", "    if (b == 0)",
                          "        return 0;", "    return a / b;", "}"],
       "vulnerable_hunks": [{"start": 3, "end": 3}],
       "ground_truth_sequence": "{1,2,[ADD],3,4}"}
    ]})json");
  const ExampleBank bank = ExampleBank::Load(dir.path() / "bank.json");
  EXPECT_EQ(bank.provenance(), "unit");
  ASSERT_EQ(bank.examples().size(), 1u);
  EXPECT_EQ(SerializeSequence(bank.examples()[0].ground_truth_sequence),
            "{1,2,[ADD],3,4}");
  EXPECT_EQ(bank.examples()[0].vulnerable_hunks,
            (std::vector<HunkLocation>{{3, 3}}));
}

TEST(ExampleBankTest, StatedSequenceMustAgreeWithDiff) {
  TempDir dir;
  WriteFile(dir.path() / "bank.json", R"json({
    "provenance": "unit",
    "examples": [
      {"cwe_id": "CWE-369",
       "vulnerable_function": ["a", "b"],
       "patch_function": ["a", "c"],
       "ground_truth_sequence": "{1,2}"}
    ]})json");
  try {
    ExampleBank::Load(dir.path() / "bank.json");
    FAIL() << "expected InvariantViolation";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
  }
}

TEST(ExampleBankTest, MissingFieldIsSchemaViolation) {
  TempDir dir;
  WriteFile(dir.path() / "bank.json",
            R"json({"provenance": "p", "examples": [{"cwe_id": "CWE-1"}]})json");
  try {
    ExampleBank::Load(dir.path() / "bank.json");
    FAIL() << "expected SchemaViolation";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
  }
}

RepairTarget CveTarget() {
  return RepairTarget{"CWE-119", CveOld(), {{6, 6}}, std::nullopt};
}

std::vector<FewShotExample> TwoShots() {
  return {MakeExample("CWE-119", 1), MakeExample("CWE-119", 2)};
}

TEST(PredictTest, ReplaysCveSequence) {
  TempDir dir;
  Script(dir.path(), {std::string("Sequence: ") + kCveSequence});
  ScriptedBackend backend(dir.path());
  const LocationPrediction p =
      PredictPatchLocations(CveTarget(), TwoShots(), backend);
  EXPECT_EQ(SerializeSequence(p.sequence), kCveSequence);
  EXPECT_FALSE(p.used_fallback);
  EXPECT_EQ(p.backend_calls, 1);
  EXPECT_EQ(p.prompt.system_message, kPredictorRole);
}

TEST(PredictTest, RetriesThenSucceeds) {
  TempDir dir;
  Script(dir.path(), {"no idea", "{1,2,3}", "{1,2}"});
  ScriptedBackend backend(dir.path());
  RepairTarget target{"CWE-1", FunctionSnapshot("f.c", "f", 1, {"a", "b"}),
                      {{1, 1}}, std::nullopt};
  const LocationPrediction p = PredictPatchLocations(target, {}, backend);
  EXPECT_EQ(SerializeSequence(p.sequence), "{1,2}");
  EXPECT_EQ(p.backend_calls, 3);
  EXPECT_FALSE(p.used_fallback);
  EXPECT_EQ(p.responses.size(), 3u);
}

TEST(PredictTest, FallbackAfterRetryBudget) {
  TempDir dir;
  Script(dir.path(), {"garbage", "{1,,2}", "still garbage", "{1,2,3}"});
  ScriptedBackend backend(dir.path());
  RepairTarget target{"CWE-1",
                      FunctionSnapshot("f.c", "f", 1, {"a", "b", "c"}),
                      {{2, 2}}, std::nullopt};
  const LocationPrediction p = PredictPatchLocations(target, {}, backend);
  EXPECT_TRUE(p.used_fallback);
  EXPECT_EQ(p.backend_calls, 3);
  EXPECT_EQ(SerializeSequence(p.sequence), "{1,[ADD],2,3}");
}

TEST(PredictTest, BackendErrorPropagates) {
  TempDir dir;
  Script(dir.path(), {"!connection reset"});
  ScriptedBackend backend(dir.path());
  try {
    PredictPatchLocations(CveTarget(), TwoShots(), backend);
    FAIL() << "expected BackendError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
  }
}

TEST(PredictTest, HunkOutsideFunctionRejected) {
  TempDir dir;
  ScriptedBackend backend(dir.path());
  RepairTarget target{"CWE-1", FunctionSnapshot("f.c", "f", 1, {"a"}),
                      {{2, 2}}, std::nullopt};
  EXPECT_THROW(PredictPatchLocations(target, {}, backend), Error);
}

TEST(FallbackSequenceTest, AddBeforeEachHunkStart) {
  EXPECT_EQ(SerializeSequence(FallbackSequence(5, {{2, 3}, {5, 5}})),
            "{1,[ADD],2,3,4,[ADD],5}");
  EXPECT_EQ(SerializeSequence(FallbackSequence(2, {{1, 2}, {1, 1}})),
            "{[ADD],1,2}");
}

TEST(BuildPromptTest, SectionOrderAndSteps) {
  const auto shots = TwoShots();
  const LocationSequence predicted = ParseSequence(kCveSequence);
  const PromptBundle bundle = BuildPrompt(CveTarget(), predicted, shots);
  EXPECT_EQ(bundle.system_message,
            "You are now playing the role of an automated vulnerability "
            "repair tool.");
  ASSERT_EQ(bundle.sections.size(), 4u);
  EXPECT_EQ(bundle.sections[1].kind, PromptSection::Kind::kFewShot);
  EXPECT_EQ(bundle.sections[2].kind, PromptSection::Kind::kFewShot);
  EXPECT_EQ(bundle.sections[3].kind, PromptSection::Kind::kTarget);

  std::string joined;
  for (const auto &s : bundle.sections) joined += s.text;
  EXPECT_EQ(joined, bundle.user_message);
  EXPECT_EQ(bundle.digest, Sha256Hex(bundle.user_message));

  for (std::size_t i = 1; i < 4; ++i) {
    const std::string &text = bundle.sections[i].text;
    const auto s1 = text.find("Step 1");
    const auto s2 = text.find("Step 2");
    const auto s3 = text.find("Step 3");
    ASSERT_NE(s1, std::string::npos);
    ASSERT_NE(s2, std::string::npos);
    ASSERT_NE(s3, std::string::npos);
    EXPECT_LT(s1, s2);
    EXPECT_LT(s2, s3);
  }
  // Few-shot blocks carry their ground truth, the target the prediction.
  for (int i = 0; i < 2; ++i) {
    EXPECT_NE(bundle.sections[1 + i].text.find(
                  SerializeSequence(shots[i].ground_truth_sequence)),
              std::string::npos);
  }
  const std::string &target = bundle.sections[3].text;
  EXPECT_NE(target.find(std::string("Step 2. Patch hunk location sequence: ") +
                        kCveSequence),
            std::string::npos);
  EXPECT_EQ(target.find(SerializeSequence(shots[0].ground_truth_sequence)),
            std::string::npos);
}

TEST(BuildPromptTest, DeterministicDigestAndFeedbackChangesIt) {
  const auto shots = TwoShots();
  const LocationSequence predicted = ParseSequence(kCveSequence);
  const PromptBundle a = BuildPrompt(CveTarget(), predicted, shots);
  const PromptBundle b = BuildPrompt(CveTarget(), predicted, shots);
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.user_message, b.user_message);

  RepairTarget with_feedback = CveTarget();
  with_feedback.feedback = "pov1: stack-buffer-overflow";
  const PromptBundle c = BuildPrompt(with_feedback, predicted, shots);
  EXPECT_NE(c.digest, a.digest);
  EXPECT_NE(c.sections[3].text.find("stack-buffer-overflow"),
            std::string::npos);
}

TEST(ExtractFunctionTest, FirstFencedBlock) {
  Lines twelve;
  for (int i = 1; i <= 12; ++i) twelve.push_back("line " + std::to_string(i));
  const FunctionSnapshot fn = ExtractFunctionFromResponse(Fenced(twelve));
  EXPECT_EQ(fn.size(), 12);
  EXPECT_EQ(fn.lines(), twelve);

  const std::string two = "```\nfirst\n```\ntext\n```c\nsecond\n```\n";
  EXPECT_EQ(ExtractFunctionFromResponse(two).lines(), Lines{"first"});
}

TEST(ExtractFunctionTest, ProseOnlyIsNoCodeFound) {
  try {
    ExtractFunctionFromResponse("I cannot fix this function, sorry.");
    FAIL() << "expected NoCodeFound";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCodeFound);
  }
}

TEST(ExtractFunctionTest, LongestBraceRegionWithoutFence) {
  const std::string text =
      "Try {this}.\nint\nf(void)\n{\n    if (x) {\n        y();\n    }\n"
      "    return 0;\n}\nThanks.\n";
  EXPECT_EQ(ExtractFunctionFromResponse(text).lines(),
            (Lines{"f(void)", "{", "    if (x) {", "        y();", "    }",
                   "    return 0;", "}"}));
}

TEST(ExtractFunctionTest, StripsLineNumbers) {
  const std::string text = "```c\n 9: int f(void)\n10: {\n11:     return 1;\n"
                           "12: }\n```\n";
  EXPECT_EQ(ExtractFunctionFromResponse(text).lines(),
            (Lines{"int f(void)", "{", "    return 1;", "}"}));
}

TEST(StripShadowCommentsTest, DropsCommentedOutOriginalLines) {
  const Lines base = CveOld().lines();
  Lines response = CveNew().lines();
  response.insert(response.begin() + 8,
                  "    // while ((count = getc(infile)) && count <= 255)");
  response.insert(response.begin() + 2, "    /* int count; */");
  response.insert(response.begin() + 2, "    // a genuine new comment");
  int stripped = 0;
  Lines out = StripShadowComments(response, base, &stripped);
  EXPECT_EQ(stripped, 2);
  Lines expected = CveNew().lines();
  expected.insert(expected.begin() + 2, "    // a genuine new comment");
  EXPECT_EQ(out, expected);
}

TEST(StripShadowCommentsTest, KeepsCommentsPresentInBase) {
  const Lines base = {"// x = 1;", "x = 1;"};
  EXPECT_EQ(StripShadowComments(base, base), base);
}

TEST(GenerateCandidatesTest, FiveCannedFixes) {
  TempDir dir;
  std::vector<std::string> responses;
  for (int i = 0; i < 5; ++i) responses.push_back(Fenced(CveNew().lines()));
  Script(dir.path(), responses);
  ScriptedBackend backend(dir.path());
  const LocationSequence predicted = ParseSequence(kCveSequence);
  const PromptBundle prompt = BuildPrompt(CveTarget(), predicted, TwoShots());
  GenerationRequest request;
  const GenerationResult result =
      GenerateCandidates(prompt, CveOld(), predicted, backend, request);
  ASSERT_EQ(result.candidates.size(), 5u);
  EXPECT_EQ(result.backend_calls, 5);
  EXPECT_TRUE(result.errors.empty());
  EXPECT_EQ(result.disagreements, 0);
  for (int i = 0; i < 5; ++i) {
    const CandidatePatch &c = result.candidates[i];
    EXPECT_EQ(c.patch_id, "p" + std::to_string(i + 1));
    EXPECT_EQ(c.iteration, 1);
    EXPECT_FALSE(c.parent_id.has_value());
    EXPECT_EQ(c.prompt_digest, prompt.digest);
    ASSERT_TRUE(c.patched_function.has_value());
    EXPECT_EQ(c.patched_function->lines(), CveNew().lines());
    EXPECT_EQ(c.patched_function->name(), "readextension");
    EXPECT_FALSE(c.disagrees_with_prediction);
  }
}

TEST(GenerateCandidatesTest, CommentedOutLineIsRemoved) {
  TempDir dir;
  Lines response = CveOld().lines();
  response[6] = "    // " + std::string(Trim(response[6]));
  Script(dir.path(), {Fenced(response)});
  ScriptedBackend backend(dir.path());
  const LocationSequence predicted = LocationSequence::Identity(18);
  const PromptBundle prompt = BuildPrompt(CveTarget(), predicted, TwoShots());
  GenerationRequest request;
  request.k = 1;
  const GenerationResult result =
      GenerateCandidates(prompt, CveOld(), predicted, backend, request);
  Lines expected = CveOld().lines();
  expected.erase(expected.begin() + 6);
  ASSERT_TRUE(result.candidates[0].patched_function.has_value());
  EXPECT_EQ(result.candidates[0].patched_function->lines(), expected);
  EXPECT_TRUE(result.candidates[0].disagrees_with_prediction);
  EXPECT_EQ(result.disagreements, 1);
}

TEST(GenerateCandidatesTest, BackendErrorsAreRecorded) {
  TempDir dir;
  const std::string fix = Fenced(CveNew().lines());
  Script(dir.path(), {fix, "!timeout", fix, "!timeout", "no code here"});
  ScriptedBackend backend(dir.path());
  const LocationSequence predicted = ParseSequence(kCveSequence);
  const PromptBundle prompt = BuildPrompt(CveTarget(), predicted, TwoShots());
  GenerationRequest request;
  request.iteration = 2;
  request.parent_id = "p3";
  request.first_patch_number = 6;
  const GenerationResult result =
      GenerateCandidates(prompt, CveOld(), predicted, backend, request);
  ASSERT_EQ(result.candidates.size(), 3u);
  ASSERT_EQ(result.errors.size(), 2u);
  EXPECT_EQ(result.errors[0].patch_id, "p7");
  EXPECT_EQ(result.errors[1].patch_id, "p9");
  EXPECT_EQ(result.candidates[0].patch_id, "p6");
  EXPECT_EQ(result.candidates[2].patch_id, "p10");
  EXPECT_EQ(result.candidates[0].parent_id, "p3");
  EXPECT_FALSE(result.candidates[2].patched_function.has_value());
  EXPECT_NE(result.candidates[2].ContentHash(),
            result.candidates[0].ContentHash());
}

TEST(GenerateCandidatesTest, AllCallsFailed) {
  TempDir dir;
  Script(dir.path(), {"!a", "!b"});
  ScriptedBackend backend(dir.path());
  const LocationSequence predicted = LocationSequence::Identity(18);
  const PromptBundle prompt = BuildPrompt(CveTarget(), predicted, TwoShots());
  GenerationRequest request;
  request.k = 2;
  try {
    GenerateCandidates(prompt, CveOld(), predicted, backend, request);
    FAIL() << "expected AllCallsFailed";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllCallsFailed);
  }
}

TEST(GenerateCandidatesTest, ByteReproducible) {
  TempDir dir;
  Script(dir.path(), {Fenced(CveNew().lines()), "prose", "{ int x; }"});
  const LocationSequence predicted = ParseSequence(kCveSequence);
  const PromptBundle prompt = BuildPrompt(CveTarget(), predicted, TwoShots());
  GenerationRequest request;
  request.k = 3;
  auto run = [&] {
    ScriptedBackend backend(dir.path());
    return GenerateCandidates(prompt, CveOld(), predicted, backend, request);
  };
  const GenerationResult a = run();
  const GenerationResult b = run();
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(a.candidates[i].ContentHash(), b.candidates[i].ContentHash());
    EXPECT_EQ(a.candidates[i].raw_response, b.candidates[i].raw_response);
  }
}

class ApplyPatchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    prefix_ = {"#include <stdio.h>", "", "static FILE *infile;", ""};
    suffix_ = Lines{std::string(), "int main(void) { return readextension(); }"};
    Lines file = prefix_;
    const Lines body = CveOld().lines();
    file.insert(file.end(), body.begin(), body.end());
    file.insert(file.end(), suffix_.begin(), suffix_.end());
    WriteFile(src_.path() / "src" / "gif.c", JoinLines(file));
    WriteFile(src_.path() / "src" / "other.c", "int other;\n");
    program_.root_path = src_.path();
    program_.source_files = Lines{std::string("src/gif.c"), "src/other.c"};
    program_.build_recipe = {"true", "true {pov}", 5, 5};
    localization_.function =
        ExtractFunction(program_, "src/gif.c", "readextension", 5, 22);
    localization_.vulnerable_hunks = {{7, 7}};
  }

  TempDir src_;
  TempDir work_;
  Lines prefix_;
  Lines suffix_;
  SourceProgram program_;
  LocalizationResult localization_;
};

TEST_F(ApplyPatchTest, IdentityIsBitIdentical) {
  const ProgramVariant v = ApplyPatch(program_, localization_,
                                      localization_.function,
                                      work_.path() / "v", "p0");
  EXPECT_EQ(v.origin_patch_id, "p0");
  EXPECT_EQ(v.build_recipe, program_.build_recipe);
  for (const auto &f : program_.source_files) {
    EXPECT_EQ(ReadFile(v.SourceRoot() / f), ReadFile(src_.path() / f)) << f;
  }
}

TEST_F(ApplyPatchTest, LongerFunctionShiftsLaterContent) {
  const FunctionSnapshot patched = localization_.function.WithLines(CveNew().lines());
  const ProgramVariant v =
      ApplyPatch(program_, localization_, patched, work_.path() / "v");
  Lines expected = prefix_;
  const Lines body = CveNew().lines();
  expected.insert(expected.end(), body.begin(), body.end());
  expected.insert(expected.end(), suffix_.begin(), suffix_.end());
  const std::string got = ReadFile(v.SourceRoot() / "src/gif.c");
  EXPECT_EQ(got, JoinLines(expected));
  EXPECT_EQ(SplitLines(got).lines.size(),
            SplitLines(ReadFile(src_.path() / "src/gif.c")).lines.size() + 2);
  EXPECT_EQ(ReadFile(v.SourceRoot() / "src/other.c"), "int other;\n");
  // The original program is untouched.
  EXPECT_EQ(ExtractFunction(program_, "src/gif.c", "readextension", 5, 22),
            localization_.function);
}

TEST_F(ApplyPatchTest, OnlyOneContiguousRegionChanges) {
  Lines body = CveOld().lines();
  body[3] = "    int count = 0;";
  body.erase(body.begin() + 10);
  const ProgramVariant v = ApplyPatch(
      program_, localization_, localization_.function.WithLines(body),
      work_.path() / "v");
  const Lines before = SplitLines(ReadFile(src_.path() / "src/gif.c")).lines;
  const Lines after = SplitLines(ReadFile(v.SourceRoot() / "src/gif.c")).lines;
  std::size_t head = 0;
  while (head < before.size() && head < after.size() &&
         before[head] == after[head])
    ++head;
  std::size_t tail = 0;
  while (tail < before.size() - head && tail < after.size() - head &&
         before[before.size() - 1 - tail] == after[after.size() - 1 - tail])
    ++tail;
  EXPECT_GE(head, 4u);
  EXPECT_GE(tail, suffix_.size());
  EXPECT_LE(before.size() - tail, 4u + 18u);
}

TEST_F(ApplyPatchTest, UnwritableWorkdirIsIoFailure) {
  WriteFile(work_.path() / "plain-file", "x");
  try {
    ApplyPatch(program_, localization_, localization_.function,
               work_.path() / "plain-file" / "v");
    FAIL() << "expected IoFailure";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
}

TEST_F(ApplyPatchTest, NonEmptyWorkdirIsIoFailure) {
  WriteFile(work_.path() / "v" / "stale", "x");
  try {
    ApplyPatch(program_, localization_, localization_.function,
               work_.path() / "v");
    FAIL() << "expected IoFailure";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
}

TEST_F(ApplyPatchTest, ExtractThenApplyIsIdentity) {
  const FunctionSnapshot extracted = ExtractFunctionFromResponse(
      Fenced(localization_.function.lines()));
  const ProgramVariant v = ApplyPatch(
      program_, localization_,
      localization_.function.WithLines(extracted.lines()), work_.path() / "v");
  EXPECT_EQ(ReadFile(v.SourceRoot() / "src/gif.c"),
            ReadFile(src_.path() / "src/gif.c"));
}

}  // namespace
}  // namespace iterfix
