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

// Taint traces: the executed statements on the path from the attacker-
// controlled source to the faulting sink, plus the CWE class reported at the
// sink and the size of the instrumented statement universe.
//
// Trace logs are ASCII, one record per '\n'-terminated line:
//
//   SOURCE <file>:<line>
//   STMT <file>:<line>          (repeatable, execution order)
//   SINK <file>:<line> <CWE-ID>
//   TOTAL <non-negative-integer>
//
// Blank lines are ignored; anything else is a TraceFormatError.

#ifndef ITERFIX_TAINT_TRACE_H_
#define ITERFIX_TAINT_TRACE_H_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace iterfix {

struct StatementRef {
  std::string file;
  int line = 1;

  std::string ToString() const;
  friend auto operator<=>(const StatementRef &, const StatementRef &) = default;
};

struct TaintTrace {
  // Unique statements in first-occurrence order. Always contains `sink`.
  std::vector<StatementRef> executed;
  StatementRef source;
  StatementRef sink;
  std::string cwe_id;
  std::int64_t total_statements = 0;

  friend bool operator==(const TaintTrace &, const TaintTrace &) = default;
};

// Throws Error(kTraceFormatError) with the 1-based line number as offset, or
// Error(kMissingRecord) with subject "SOURCE", "SINK" or "TOTAL".
TaintTrace ParseTraceLog(std::string_view log_text);

// Canonical log text for `trace`; ParseTraceLog(FormatTraceLog(t)) == t.
std::string FormatTraceLog(const TaintTrace &trace);

// A failing patch is free of new vulnerabilities only when it reports the
// same CWE class at the same sink as the original program under the same
// PoV. Returns true when either condition fails.
bool IntroducesNewVulnerability(const TaintTrace &original,
                                const TaintTrace &patched);

// |unique executed| / total_statements.
double TaintStatementCoverage(const TaintTrace &trace);

}  // namespace iterfix

#endif  // ITERFIX_TAINT_TRACE_H_
