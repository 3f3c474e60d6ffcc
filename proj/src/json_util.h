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

// Schema helpers over nlohmann::json that raise Error(kSchemaViolation)
// naming the offending field.

#ifndef ITERFIX_SRC_JSON_UTIL_H_
#define ITERFIX_SRC_JSON_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "iterfix/error.h"
#include "json.hpp"

namespace iterfix::internal {

using Json = nlohmann::json;

// Parses a JSON file; missing file -> kMissingFile, bad JSON ->
// kSchemaViolation with `artifact` as subject.
Json ReadJsonFile(const std::filesystem::path &path, std::string_view artifact);

const Json &RequireField(const Json &object, std::string_view field,
                         std::string_view context);
std::string RequireString(const Json &object, std::string_view field,
                          std::string_view context);
double RequireNumber(const Json &object, std::string_view field,
                     std::string_view context);
int RequireInt(const Json &object, std::string_view field,
               std::string_view context);

[[noreturn]] void SchemaError(std::string_view field, const std::string &reason);

}  // namespace iterfix::internal

#endif  // ITERFIX_SRC_JSON_UTIL_H_
