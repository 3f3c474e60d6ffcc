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

#include "iterfix/taint_trace.h"

#include <charconv>
#include <limits>
#include <optional>
#include <set>

#include "iterfix/error.h"
#include "iterfix/text.h"

namespace iterfix {

namespace {

[[noreturn]] void FormatError(std::size_t line_no, const std::string &reason) {
  throw Error(ErrorCode::kTraceFormatError,
              "line " + std::to_string(line_no) + ": " + reason, {}, line_no);
}

std::optional<std::int64_t> ParseNumber(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

StatementRef ParseRef(std::string_view text, std::size_t line_no) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    FormatError(line_no, "expected <file>:<line>, got '" + std::string(text) +
                             "'");
  }
  const auto line = ParseNumber(text.substr(colon + 1));
  if (!line || *line < 1 || *line > std::numeric_limits<int>::max()) {
    FormatError(line_no, "bad line number in '" + std::string(text) + "'");
  }
  return StatementRef{std::string(text.substr(0, colon)),
                      static_cast<int>(*line)};
}

}  // namespace

std::string StatementRef::ToString() const {
  return file + ":" + std::to_string(line);
}

TaintTrace ParseTraceLog(std::string_view log_text) {
  TaintTrace trace;
  std::optional<StatementRef> source;
  std::optional<StatementRef> sink;
  std::optional<std::int64_t> total;
  std::set<StatementRef> seen;

  const SplitText split = SplitLines(log_text);
  for (std::size_t i = 0; i < split.lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = Trim(split.lines[i]);
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    if (space == std::string_view::npos) {
      FormatError(line_no, "record without operand: '" + std::string(line) +
                               "'");
    }
    const std::string_view kind = line.substr(0, space);
    const std::string_view rest = Trim(line.substr(space + 1));

    if (kind == "STMT") {
      StatementRef ref = ParseRef(rest, line_no);
      if (seen.insert(ref).second) trace.executed.push_back(std::move(ref));
    } else if (kind == "SOURCE") {
      if (source) FormatError(line_no, "duplicate SOURCE record");
      source = ParseRef(rest, line_no);
    } else if (kind == "SINK") {
      if (sink) FormatError(line_no, "duplicate SINK record");
      const std::size_t sep = rest.find(' ');
      if (sep == std::string_view::npos) {
        FormatError(line_no, "SINK record without CWE-ID");
      }
      sink = ParseRef(rest.substr(0, sep), line_no);
      const std::string_view cwe = Trim(rest.substr(sep + 1));
      if (cwe.empty() || cwe.find(' ') != std::string_view::npos) {
        FormatError(line_no, "bad CWE-ID in SINK record");
      }
      trace.cwe_id = std::string(cwe);
    } else if (kind == "TOTAL") {
      if (total) FormatError(line_no, "duplicate TOTAL record");
      total = ParseNumber(rest);
      if (!total) FormatError(line_no, "TOTAL expects a non-negative integer");
    } else {
      FormatError(line_no, "unknown record '" + std::string(kind) + "'");
    }
  }

  if (!source) {
    throw Error(ErrorCode::kMissingRecord, "trace has no SOURCE record",
                "SOURCE");
  }
  if (!sink) {
    throw Error(ErrorCode::kMissingRecord, "trace has no SINK record", "SINK");
  }
  if (!total) {
    throw Error(ErrorCode::kMissingRecord, "trace has no TOTAL record",
                "TOTAL");
  }
  if (seen.insert(*sink).second) trace.executed.push_back(*sink);
  if (*total <= 0) {
    throw Error(ErrorCode::kTraceFormatError,
                "TOTAL must be positive for a usable trace", "TOTAL");
  }
  if (static_cast<std::int64_t>(trace.executed.size()) > *total) {
    throw Error(ErrorCode::kTraceFormatError,
                "trace executes " + std::to_string(trace.executed.size()) +
                    " unique statements but TOTAL is " +
                    std::to_string(*total),
                "TOTAL");
  }
  trace.source = *source;
  trace.sink = *sink;
  trace.total_statements = *total;
  return trace;
}

std::string FormatTraceLog(const TaintTrace &trace) {
  std::string out = "SOURCE " + trace.source.ToString() + "\n";
  for (const StatementRef &ref : trace.executed) {
    out += "STMT " + ref.ToString() + "\n";
  }
  out += "SINK " + trace.sink.ToString() + " " + trace.cwe_id + "\n";
  out += "TOTAL " + std::to_string(trace.total_statements) + "\n";
  return out;
}

bool IntroducesNewVulnerability(const TaintTrace &original,
                                const TaintTrace &patched) {
  const bool same_cwe = original.cwe_id == patched.cwe_id;
  const bool same_sink = original.sink == patched.sink;
  return !(same_cwe && same_sink);
}

double TaintStatementCoverage(const TaintTrace &trace) {
  return static_cast<double>(trace.executed.size()) /
         static_cast<double>(trace.total_statements);
}

}  // namespace iterfix
