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

#ifndef ITERFIX_ERROR_H_
#define ITERFIX_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iterfix {

enum class ErrorCode {
  kMissingFile,
  kSchemaViolation,
  kInvariantViolation,
  kFileNotInProgram,
  kRangeOutOfFile,
  kAnchorOutOfRange,
  kParseError,
  kEmptyBankForCwe,
  kBackendError,
  kPredictionUnusable,
  kAllCallsFailed,
  kNoCodeFound,
  kIoFailure,
  kHarnessFault,
  kTraceFormatError,
  kMissingRecord,
  kProviderFault,
  kSanityCheckFailed,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

// The single exception type thrown by the library. `subject()` carries the
// machine-checkable part of the diagnostic: the missing artifact name, the
// schema field, the missing record, and so on. `offset()` is set for parse
// errors (byte offset) and trace format errors (1-based line number).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message, std::string subject = {},
        std::optional<std::size_t> offset = std::nullopt);

  ErrorCode code() const { return code_; }
  const std::string &subject() const { return subject_; }
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  ErrorCode code_;
  std::string subject_;
  std::optional<std::size_t> offset_;
};

}  // namespace iterfix

#endif  // ITERFIX_ERROR_H_
