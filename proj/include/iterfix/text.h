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

// Line-oriented text helpers shared by every module. Text is split on '\n';
// a trailing newline is remembered separately so that files round-trip
// byte-for-byte. Carriage returns and tabs stay inside the line verbatim.

#ifndef ITERFIX_TEXT_H_
#define ITERFIX_TEXT_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iterfix {

struct SplitText {
  std::vector<std::string> lines;
  bool trailing_newline = false;
};

SplitText SplitLines(std::string_view text);

// Joins with '\n' and appends a final '\n' when `trailing_newline` is set.
std::string JoinLines(std::span<const std::string> lines,
                      bool trailing_newline = true);

std::string_view Trim(std::string_view s);

bool StartsWith(std::string_view s, std::string_view prefix);

// Throws Error(kMissingFile) when absent, Error(kIoFailure) on read errors.
std::string ReadFile(const std::filesystem::path &path);

// Creates parent directories. Throws Error(kIoFailure).
void WriteFile(const std::filesystem::path &path, std::string_view contents);

// Lower-case hex SHA-256.
std::string Sha256Hex(std::string_view data);

// Keeps at most `limit` bytes from the end of `text`.
std::string TailExcerpt(std::string_view text, std::size_t limit);

// Single-quotes `arg` for /bin/sh.
std::string ShellQuote(std::string_view arg);

// Replaces every occurrence of `token` in `text`.
std::string ReplaceAll(std::string_view text, std::string_view token,
                       std::string_view replacement);

}  // namespace iterfix

#endif  // ITERFIX_TEXT_H_
