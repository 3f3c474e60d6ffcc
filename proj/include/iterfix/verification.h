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

// Compiles program variants and runs their PoVs. Each variant lives in its
// own working directory:
//
//   <workdir>/program/   copy of the program with the patch applied
//   <workdir>/logs/      compile and PoV stdout/stderr

#ifndef ITERFIX_VERIFICATION_H_
#define ITERFIX_VERIFICATION_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iterfix/corpus_model.h"
#include "iterfix/subprocess.h"

namespace iterfix {

struct ProgramVariant {
  std::filesystem::path workdir;
  std::string origin_patch_id;
  BuildRecipe build_recipe;

  std::filesystem::path SourceRoot() const { return workdir / "program"; }
  std::filesystem::path LogDir() const { return workdir / "logs"; }
  // Present once the variant compiled successfully.
  std::filesystem::path CompileMarker() const {
    return LogDir() / "compile.ok";
  }
  bool Compiled() const;
};

struct VerificationOutcome {
  enum class Category { kPlausible, kFailingPoV, kCompileFail, kTimeout };
  enum class Stage { kCompile, kRun };

  Category category = Category::kPlausible;
  // kFailingPoV: parallel lists, at least one entry.
  std::vector<std::string> failed_pov_ids;
  std::vector<std::string> failure_messages;
  // kCompileFail.
  std::string log_excerpt;
  // kTimeout.
  Stage stage = Stage::kCompile;
  std::optional<std::string> timeout_pov_id;

  static VerificationOutcome Plausible();
  static VerificationOutcome FailingPoV(std::vector<std::string> ids,
                                        std::vector<std::string> messages);
  static VerificationOutcome CompileFail(std::string log_excerpt);
  static VerificationOutcome Timeout(Stage stage,
                                     std::optional<std::string> pov_id);

  bool is_plausible() const { return category == Category::kPlausible; }
  // Short human-readable summary, also used as prompt feedback.
  std::string Summary() const;

  friend bool operator==(const VerificationOutcome &,
                         const VerificationOutcome &) = default;
};

std::string_view CategoryName(VerificationOutcome::Category category);

enum class PovVerdict { kTriggered, kClean };

// Triggered when the process died from a signal (directly, or as reported
// by the shell via 128+N), printed a sanitizer-style report, or echoed the
// expected failure signature.
PovVerdict ClassifyFailureMessage(std::string_view output,
                                  const ExitStatus &status,
                                  std::string_view signature);

struct VerifyOptions {
  std::size_t log_excerpt_limit = 8 * 1024;
  // Extra environment for the PoV runs.
  std::map<std::string, std::string> run_env;
};

// Compiles, then runs every PoV in order. Stops at the first timeout;
// otherwise collects every triggered PoV. Throws Error(kHarnessFault) when
// the sandbox itself cannot be set up.
VerificationOutcome Verify(const ProgramVariant &variant,
                           std::span<const PoV> povs,
                           const VerifyOptions &options = {});

// Hook for adding PoVs (for instance from a fuzzer) before verification.
// The shipped implementation adds nothing.
class PovAugmenter {
 public:
  virtual ~PovAugmenter() = default;
  virtual std::vector<PoV> ExtraPovs(const RepairTask &task) = 0;
};

class NoExtraPovs : public PovAugmenter {
 public:
  std::vector<PoV> ExtraPovs(const RepairTask &) override { return {}; }
};

}  // namespace iterfix

#endif  // ITERFIX_VERIFICATION_H_
