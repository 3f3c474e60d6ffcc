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

#include "iterfix/hunk_diff.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "iterfix/error.h"

namespace iterfix {

namespace {

constexpr std::size_t kMaxTableCells = 40'000'000;

enum class Op { kDelete, kInsert, kMatch };

struct Step {
  Op op;
  int old_index;  // 0-based position in old when the step is taken
  int new_index;
};

// Greedy walk over the suffix-LCS table: delete whenever that stays optimal,
// otherwise match old[i] at the earliest new line that stays optimal. Early
// matching leaves the longest new suffix, so every later deletion that is
// feasible at all remains feasible.
std::vector<Step> EditScript(std::span<const std::string> old_lines,
                             std::span<const std::string> new_lines) {
  const std::size_t n = old_lines.size();
  const std::size_t m = new_lines.size();
  if ((n + 1) * (m + 1) > kMaxTableCells) {
    throw Error(ErrorCode::kInvariantViolation,
                "inputs too large for line diff (" + std::to_string(n) + "x" +
                    std::to_string(m) + ")",
                "size");
  }
  const std::size_t width = m + 1;
  std::vector<int> lcs((n + 1) * width, 0);
  const auto at = [&](std::size_t i, std::size_t j) -> int & {
    return lcs[i * width + j];
  };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = old_lines[i] == new_lines[j]
                     ? at(i + 1, j + 1) + 1
                     : std::max(at(i + 1, j), at(i, j + 1));
    }
  }

  std::vector<Step> steps;
  steps.reserve(n + m);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    const int here = at(i, j);
    if (i < n && at(i + 1, j) == here) {
      steps.push_back({Op::kDelete, static_cast<int>(i), static_cast<int>(j)});
      ++i;
    } else if (i < n && j < m && old_lines[i] == new_lines[j] &&
               at(i + 1, j + 1) + 1 == here) {
      steps.push_back({Op::kMatch, static_cast<int>(i), static_cast<int>(j)});
      ++i;
      ++j;
    } else {
      steps.push_back({Op::kInsert, static_cast<int>(i), static_cast<int>(j)});
      ++j;
    }
  }
  return steps;
}

void ValidateDiff(const HunkDiff &diff, int anchor_length) {
  int previous_end = 0;
  for (const HunkLocation &r : diff.removals) {
    if (!r.Within(anchor_length)) {
      throw Error(ErrorCode::kAnchorOutOfRange,
                  "removal " + r.ToString() + " outside 1.." +
                      std::to_string(anchor_length),
                  "removals");
    }
    if (r.start_line <= previous_end) {
      throw Error(ErrorCode::kInvariantViolation,
                  "removals overlap or are unsorted", "removals");
    }
    previous_end = r.end_line;
  }
  int previous_anchor = -1;
  for (const Insertion &ins : diff.insertions) {
    if (ins.after_old_line < 0 || ins.after_old_line > anchor_length) {
      throw Error(ErrorCode::kAnchorOutOfRange,
                  "insertion anchor " + std::to_string(ins.after_old_line) +
                      " outside 0.." + std::to_string(anchor_length),
                  "insertions");
    }
    if (ins.after_old_line <= previous_anchor) {
      throw Error(ErrorCode::kInvariantViolation,
                  "insertion anchors repeat or are unsorted", "insertions");
    }
    previous_anchor = ins.after_old_line;
  }
}

// removed[i] for old line i (1-based); inserted[a] = insertion index or -1.
struct DiffIndex {
  std::vector<bool> removed;
  std::vector<int> inserted;
};

DiffIndex IndexDiff(const HunkDiff &diff, int anchor_length) {
  DiffIndex index{std::vector<bool>(anchor_length + 1, false),
                  std::vector<int>(anchor_length + 1, -1)};
  for (const HunkLocation &r : diff.removals) {
    for (int line = r.start_line; line <= r.end_line; ++line) {
      index.removed[line] = true;
    }
  }
  for (std::size_t k = 0; k < diff.insertions.size(); ++k) {
    index.inserted[diff.insertions[k].after_old_line] = static_cast<int>(k);
  }
  return index;
}

}  // namespace

int HunkDiff::RemovedLines() const {
  int total = 0;
  for (const HunkLocation &r : removals) total += r.end_line - r.start_line + 1;
  return total;
}

int HunkDiff::InsertedLines() const {
  int total = 0;
  for (const Insertion &ins : insertions) {
    total += static_cast<int>(ins.new_lines.size());
  }
  return total;
}

LineAlignment AlignLines(std::span<const std::string> old_lines,
                         std::span<const std::string> new_lines) {
  LineAlignment alignment{std::vector<int>(old_lines.size(), 0),
                          std::vector<int>(new_lines.size(), 0)};
  for (const Step &step : EditScript(old_lines, new_lines)) {
    if (step.op != Op::kMatch) continue;
    alignment.old_to_new[step.old_index] = step.new_index + 1;
    alignment.new_to_old[step.new_index] = step.old_index + 1;
  }
  return alignment;
}

HunkDiff ComputeHunks(std::span<const std::string> old_lines,
                      std::span<const std::string> new_lines) {
  HunkDiff diff;
  for (const Step &step : EditScript(old_lines, new_lines)) {
    if (step.op == Op::kDelete) {
      const int line = step.old_index + 1;
      if (!diff.removals.empty() && diff.removals.back().end_line == line - 1) {
        diff.removals.back().end_line = line;
      } else {
        diff.removals.push_back({line, line});
      }
    } else if (step.op == Op::kInsert) {
      const int anchor = step.old_index;
      if (diff.insertions.empty() ||
          diff.insertions.back().after_old_line != anchor) {
        diff.insertions.push_back({anchor, {}});
      }
      diff.insertions.back().new_lines.push_back(new_lines[step.new_index]);
    }
  }
  return diff;
}

HunkDiff ComputeHunks(const FunctionSnapshot &old_fn,
                      const FunctionSnapshot &new_fn) {
  return ComputeHunks(old_fn.lines(), new_fn.lines());
}

std::vector<std::string> ApplyHunks(std::span<const std::string> old_lines,
                                    const HunkDiff &diff) {
  const int n = static_cast<int>(old_lines.size());
  ValidateDiff(diff, n);
  const DiffIndex index = IndexDiff(diff, n);
  std::vector<std::string> out;
  const auto emit_insertion = [&](int anchor) {
    if (index.inserted[anchor] < 0) return;
    const auto &lines = diff.insertions[index.inserted[anchor]].new_lines;
    out.insert(out.end(), lines.begin(), lines.end());
  };
  emit_insertion(0);
  for (int line = 1; line <= n; ++line) {
    if (!index.removed[line]) out.push_back(old_lines[line - 1]);
    emit_insertion(line);
  }
  return out;
}

LocationSequence::LocationSequence(std::vector<Token> tokens,
                                   int anchor_length)
    : tokens_(std::move(tokens)), anchor_length_(anchor_length) {
  if (anchor_length_ < 1) {
    throw Error(ErrorCode::kInvariantViolation,
                "sequence must cover at least one line", "missing");
  }
  std::set<int> seen;
  int previous = 0;
  for (const Token &token : tokens_) {
    if (token.kind == Kind::kAdd) continue;
    if (token.line < 1 || token.line > anchor_length_) {
      throw Error(ErrorCode::kInvariantViolation,
                  "line " + std::to_string(token.line) + " outside 1.." +
                      std::to_string(anchor_length_),
                  "range");
    }
    if (seen.count(token.line) != 0) {
      throw Error(ErrorCode::kInvariantViolation,
                  "duplicate line " + std::to_string(token.line), "duplicate");
    }
    if (token.line < previous) {
      throw Error(ErrorCode::kInvariantViolation,
                  "line " + std::to_string(token.line) + " after line " +
                      std::to_string(previous),
                  "non-monotone");
    }
    seen.insert(token.line);
    previous = token.line;
  }
  if (static_cast<int>(seen.size()) != anchor_length_) {
    int missing = 1;
    while (seen.count(missing) != 0) ++missing;
    throw Error(ErrorCode::kInvariantViolation,
                "missing line " + std::to_string(missing), "missing");
  }
}

LocationSequence LocationSequence::Identity(int n) {
  std::vector<Token> tokens;
  tokens.reserve(n);
  for (int line = 1; line <= n; ++line) tokens.push_back(Token::Keep(line));
  return LocationSequence(std::move(tokens), n);
}

int LocationSequence::AddCount() const {
  return static_cast<int>(std::count_if(
      tokens_.begin(), tokens_.end(),
      [](const Token &t) { return t.kind == Kind::kAdd; }));
}

int LocationSequence::RemoveCount() const {
  return static_cast<int>(std::count_if(
      tokens_.begin(), tokens_.end(),
      [](const Token &t) { return t.kind == Kind::kRemove; }));
}

LocationSequence ToLocationSequence(const HunkDiff &diff, int anchor_length) {
  if (anchor_length < 1) {
    throw Error(ErrorCode::kAnchorOutOfRange, "anchor length must be >= 1",
                "anchor_length");
  }
  ValidateDiff(diff, anchor_length);
  const DiffIndex index = IndexDiff(diff, anchor_length);
  using Token = LocationSequence::Token;
  std::vector<Token> tokens;
  if (index.inserted[0] >= 0) tokens.push_back(Token::Add());
  for (int line = 1; line <= anchor_length; ++line) {
    tokens.push_back(index.removed[line] ? Token::Remove(line)
                                         : Token::Keep(line));
    if (index.inserted[line] >= 0) tokens.push_back(Token::Add());
  }
  return LocationSequence(std::move(tokens), anchor_length);
}

namespace {

class SequenceParser {
 public:
  explicit SequenceParser(std::string_view text) : text_(text) {}

  LocationSequence Parse() {
    SkipSpace();
    Expect('{');
    SkipSpace();
    std::vector<LocationSequence::Token> tokens;
    int lines = 0;
    if (Peek() == '}') {
      ++pos_;
    } else {
      while (true) {
        SkipSpace();
        tokens.push_back(ParseToken());
        if (tokens.back().kind != LocationSequence::Kind::kAdd) ++lines;
        SkipSpace();
        if (Peek() == ',') {
          ++pos_;
          continue;
        }
        Expect('}');
        break;
      }
    }
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected text after closing brace");
    return LocationSequence(std::move(tokens), lines);
  }

 private:
  char Peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  [[noreturn]] void Fail(const std::string &reason) const {
    throw Error(ErrorCode::kParseError,
                "offset " + std::to_string(pos_) + ": " + reason, {}, pos_);
  }

  void Expect(char c) {
    if (Peek() != c) {
      if (pos_ >= text_.size()) Fail(std::string("expected '") + c + "'");
      Fail(std::string("expected '") + c + "', found '" + Peek() + "'");
    }
    ++pos_;
  }

  int ParseNumber() {
    const std::size_t begin = pos_;
    long long value = 0;
    while (std::isdigit(static_cast<unsigned char>(Peek()))) {
      value = value * 10 + (Peek() - '0');
      ++pos_;
      if (pos_ - begin > 9) Fail("line number too large");
    }
    if (pos_ == begin) Fail("expected a line number");
    return static_cast<int>(value);
  }

  LocationSequence::Token ParseToken() {
    using Token = LocationSequence::Token;
    if (std::isdigit(static_cast<unsigned char>(Peek()))) {
      return Token::Keep(ParseNumber());
    }
    if (Peek() != '[') Fail("expected a line number or '['");
    ++pos_;
    SkipSpace();
    Token token;
    if (std::isdigit(static_cast<unsigned char>(Peek()))) {
      token = Token::Remove(ParseNumber());
    } else {
      const std::size_t begin = pos_;
      while (std::isalpha(static_cast<unsigned char>(Peek()))) ++pos_;
      std::string word(text_.substr(begin, pos_ - begin));
      for (char &c : word) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
      if (word != "ADD") {
        pos_ = begin;
        Fail("unknown token inside brackets");
      }
      token = Token::Add();
    }
    SkipSpace();
    Expect(']');
    return token;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

LocationSequence ParseSequence(std::string_view text) {
  return SequenceParser(text).Parse();
}

std::string SerializeSequence(const LocationSequence &seq) {
  std::string out = "{";
  bool first = true;
  for (const LocationSequence::Token &token : seq.tokens()) {
    if (!first) out += ',';
    first = false;
    switch (token.kind) {
      case LocationSequence::Kind::kKeep:
        out += std::to_string(token.line);
        break;
      case LocationSequence::Kind::kRemove:
        out += '[' + std::to_string(token.line) + ']';
        break;
      case LocationSequence::Kind::kAdd:
        out += "[ADD]";
        break;
    }
  }
  out += '}';
  return out;
}

std::string_view VerdictName(HunkVerdict verdict) {
  switch (verdict) {
    case HunkVerdict::kUnchanged: return "unchanged";
    case HunkVerdict::kSingleHunk: return "single_hunk";
    case HunkVerdict::kMultiHunk: return "multi_hunk";
  }
  return "unknown";
}

namespace {

// Merged gap spans, see CountEditRegions.
std::vector<std::pair<int, int>> MergedGapSpans(const HunkDiff &diff) {
  std::vector<std::pair<int, int>> spans;
  for (const HunkLocation &r : diff.removals) {
    spans.emplace_back(r.start_line - 1, r.end_line);
  }
  for (const Insertion &ins : diff.insertions) {
    spans.emplace_back(ins.after_old_line, ins.after_old_line);
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<int, int>> merged;
  for (const auto &span : spans) {
    if (!merged.empty() && span.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, span.second);
    } else {
      merged.push_back(span);
    }
  }
  return merged;
}

}  // namespace

int CountEditRegions(const HunkDiff &diff) {
  return static_cast<int>(MergedGapSpans(diff).size());
}

HunkVerdict ClassifyMultiHunk(std::span<const std::string> old_lines,
                              std::span<const std::string> new_lines) {
  const int regions = CountEditRegions(ComputeHunks(old_lines, new_lines));
  if (regions == 0) return HunkVerdict::kUnchanged;
  return regions == 1 ? HunkVerdict::kSingleHunk : HunkVerdict::kMultiHunk;
}

HunkVerdict ClassifyMultiHunk(const FunctionSnapshot &old_fn,
                              const FunctionSnapshot &new_fn) {
  return ClassifyMultiHunk(old_fn.lines(), new_fn.lines());
}

std::vector<HunkLocation> EditRegions(const HunkDiff &diff,
                                      int anchor_length) {
  std::vector<HunkLocation> out;
  for (const auto &[first_gap, last_gap] : MergedGapSpans(diff)) {
    if (last_gap > first_gap) {
      out.push_back({first_gap + 1, last_gap});
    } else {
      const int line = std::clamp(first_gap, 1, std::max(anchor_length, 1));
      out.push_back({line, line});
    }
  }
  return out;
}

HunkLocation MapHunk(const HunkDiff &diff, const HunkLocation &hunk,
                     int old_length) {
  ValidateDiff(diff, old_length);
  const DiffIndex index = IndexDiff(diff, old_length);
  // before[i]: new lines emitted before old line i; after[i]: emitted once
  // old line i and its anchored insertion are done.
  std::vector<int> before(old_length + 2, 0);
  std::vector<int> after(old_length + 2, 0);
  int emitted = 0;
  const auto insertion_size = [&](int anchor) {
    return index.inserted[anchor] < 0
               ? 0
               : static_cast<int>(
                     diff.insertions[index.inserted[anchor]].new_lines.size());
  };
  emitted += insertion_size(0);
  for (int line = 1; line <= old_length; ++line) {
    before[line] = emitted;
    if (!index.removed[line]) ++emitted;
    emitted += insertion_size(line);
    after[line] = emitted;
  }
  const int total = emitted;
  const int start = std::clamp(hunk.start_line, 1, old_length);
  const int end = std::clamp(hunk.end_line, start, old_length);
  int new_start = before[start] + 1;
  int new_end = after[end];
  if (new_end < new_start) {
    const int line = std::clamp(new_start, 1, std::max(total, 1));
    return {line, line};
  }
  return {new_start, new_end};
}

}  // namespace iterfix
