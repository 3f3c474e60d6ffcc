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

// Line-level diffing between two versions of a function and the patch-hunk
// location sequence encoding derived from it.
//
// A location sequence lists every old line exactly once, in order, as either
// a kept line `k` or a removed line `[k]`, with `[ADD]` tokens marking where
// new hunks are inserted:
//
//   {1,2,3,4,5,[ADD],6,[7],[ADD],8,9}
//
// Diffs are minimal under the longest-common-subsequence edit model. When
// several minimal scripts exist, the one whose sorted removal set is
// lexicographically smallest wins, and each kept line is matched to the
// earliest possible new line. A replaced line therefore shows up as
// `[k],[ADD]`: the insertion is anchored after the removed line.

#ifndef ITERFIX_HUNK_DIFF_H_
#define ITERFIX_HUNK_DIFF_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iterfix/corpus_model.h"

namespace iterfix {

struct Insertion {
  // 0 means "before line 1"; k means "after old line k".
  int after_old_line = 0;
  std::vector<std::string> new_lines;

  friend bool operator==(const Insertion &, const Insertion &) = default;
};

struct HunkDiff {
  // Old coordinates; disjoint, sorted, maximal.
  std::vector<HunkLocation> removals;
  // Sorted by anchor, at most one entry per anchor.
  std::vector<Insertion> insertions;

  bool empty() const { return removals.empty() && insertions.empty(); }
  int RemovedLines() const;
  int InsertedLines() const;
  int ChangedLines() const { return RemovedLines() + InsertedLines(); }

  friend bool operator==(const HunkDiff &, const HunkDiff &) = default;
};

// Per-line correspondence of a minimal diff. old_to_new[i-1] is the new
// line kept old line i became, or 0 when removed; new_to_old likewise, with
// 0 for inserted lines.
struct LineAlignment {
  std::vector<int> old_to_new;
  std::vector<int> new_to_old;
};

LineAlignment AlignLines(std::span<const std::string> old_lines,
                         std::span<const std::string> new_lines);

HunkDiff ComputeHunks(std::span<const std::string> old_lines,
                      std::span<const std::string> new_lines);
HunkDiff ComputeHunks(const FunctionSnapshot &old_fn,
                      const FunctionSnapshot &new_fn);

// Deletes the removals and inserts new lines after their anchors. Throws
// Error(kAnchorOutOfRange) when the diff does not fit `old_lines`.
std::vector<std::string> ApplyHunks(std::span<const std::string> old_lines,
                                    const HunkDiff &diff);

class LocationSequence {
 public:
  enum class Kind { kKeep, kRemove, kAdd };
  struct Token {
    Kind kind = Kind::kKeep;
    int line = 0;  // 0 for kAdd

    static Token Keep(int line) { return {Kind::kKeep, line}; }
    static Token Remove(int line) { return {Kind::kRemove, line}; }
    static Token Add() { return {Kind::kAdd, 0}; }
    friend bool operator==(const Token &, const Token &) = default;
  };

  LocationSequence() = default;
  // Throws Error(kInvariantViolation) naming the broken invariant.
  LocationSequence(std::vector<Token> tokens, int anchor_length);

  // {1,2,...,n}
  static LocationSequence Identity(int n);

  const std::vector<Token> &tokens() const { return tokens_; }
  int anchor_length() const { return anchor_length_; }
  int AddCount() const;
  int RemoveCount() const;

  friend bool operator==(const LocationSequence &,
                         const LocationSequence &) = default;

 private:
  std::vector<Token> tokens_;
  int anchor_length_ = 0;
};

// Throws Error(kAnchorOutOfRange) when the diff reaches beyond
// `anchor_length`.
LocationSequence ToLocationSequence(const HunkDiff &diff, int anchor_length);

// Whitespace-tolerant. Throws Error(kParseError) with the byte offset, or
// Error(kInvariantViolation) for duplicated, missing, or out-of-order lines.
LocationSequence ParseSequence(std::string_view text);

// Canonical form: braces, comma-separated, no spaces.
std::string SerializeSequence(const LocationSequence &seq);

enum class HunkVerdict { kUnchanged, kSingleHunk, kMultiHunk };

std::string_view VerdictName(HunkVerdict verdict);

// Number of maximal contiguous edit regions in old coordinates. A removal of
// lines s..e touches the gaps s-1..e; an insertion after line a touches gap
// a. Touching spans merge.
int CountEditRegions(const HunkDiff &diff);

HunkVerdict ClassifyMultiHunk(std::span<const std::string> old_lines,
                              std::span<const std::string> new_lines);
HunkVerdict ClassifyMultiHunk(const FunctionSnapshot &old_fn,
                              const FunctionSnapshot &new_fn);

// Edit regions of `diff` expressed as old-line hunks. Insertion-only regions
// map to the line just before the insertion (line 1 for anchor 0).
std::vector<HunkLocation> EditRegions(const HunkDiff &diff, int anchor_length);

// Maps an old-coordinate hunk onto the new version: the span of new lines
// produced between old line start and old line end, including insertions
// anchored inside. Empty spans collapse to the nearest new line.
HunkLocation MapHunk(const HunkDiff &diff, const HunkLocation &hunk,
                     int old_length);

}  // namespace iterfix

#endif  // ITERFIX_HUNK_DIFF_H_
