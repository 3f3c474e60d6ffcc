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

#include "iterfix/error.h"

namespace iterfix {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kFileNotInProgram: return "FileNotInProgram";
    case ErrorCode::kRangeOutOfFile: return "RangeOutOfFile";
    case ErrorCode::kAnchorOutOfRange: return "AnchorOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyBankForCwe: return "EmptyBankForCWE";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kPredictionUnusable: return "PredictionUnusable";
    case ErrorCode::kAllCallsFailed: return "AllCallsFailed";
    case ErrorCode::kNoCodeFound: return "NoCodeFound";
    case ErrorCode::kIoFailure: return "IOFailure";
    case ErrorCode::kHarnessFault: return "HarnessFault";
    case ErrorCode::kTraceFormatError: return "TraceFormatError";
    case ErrorCode::kMissingRecord: return "MissingRecord";
    case ErrorCode::kProviderFault: return "ProviderFault";
    case ErrorCode::kSanityCheckFailed: return "SanityCheckFailed";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string Compose(ErrorCode code, const std::string &message) {
  std::string out(ErrorCodeName(code));
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string &message, std::string subject,
             std::optional<std::size_t> offset)
    : std::runtime_error(Compose(code, message)),
      code_(code),
      subject_(std::move(subject)),
      offset_(offset) {}

}  // namespace iterfix
