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

#include "json_util.h"

#include <limits>

#include "iterfix/text.h"

namespace iterfix::internal {

void SchemaError(std::string_view field, const std::string &reason) {
  throw Error(ErrorCode::kSchemaViolation,
              std::string(field) + ": " + reason, std::string(field));
}

Json ReadJsonFile(const std::filesystem::path &path,
                  std::string_view artifact) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kMissingFile,
                "missing " + std::string(artifact) + " (" + path.string() + ")",
                std::string(artifact));
  }
  const std::string text = ReadFile(path);
  Json doc = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) SchemaError(artifact, "not valid JSON");
  if (!doc.is_object()) SchemaError(artifact, "top level must be an object");
  return doc;
}

const Json &RequireField(const Json &object, std::string_view field,
                         std::string_view context) {
  const std::string name =
      context.empty() ? std::string(field)
                      : std::string(context) + "." + std::string(field);
  if (!object.is_object()) SchemaError(context, "expected an object");
  const auto it = object.find(std::string(field));
  if (it == object.end()) SchemaError(name, "required field is missing");
  return *it;
}

std::string RequireString(const Json &object, std::string_view field,
                          std::string_view context) {
  const Json &value = RequireField(object, field, context);
  if (!value.is_string()) {
    SchemaError(context.empty() ? std::string(field)
                                : std::string(context) + "." +
                                      std::string(field),
                "expected a string");
  }
  return value.get<std::string>();
}

double RequireNumber(const Json &object, std::string_view field,
                     std::string_view context) {
  const Json &value = RequireField(object, field, context);
  if (!value.is_number()) {
    SchemaError(context.empty() ? std::string(field)
                                : std::string(context) + "." +
                                      std::string(field),
                "expected a number");
  }
  return value.get<double>();
}

int RequireInt(const Json &object, std::string_view field,
               std::string_view context) {
  const Json &value = RequireField(object, field, context);
  if (!value.is_number_integer()) {
    SchemaError(context.empty() ? std::string(field)
                                : std::string(context) + "." +
                                      std::string(field),
                "expected an integer");
  }
  const auto wide = value.get<long long>();
  if (wide < std::numeric_limits<int>::min() ||
      wide > std::numeric_limits<int>::max()) {
    SchemaError(field, "integer out of range");
  }
  return static_cast<int>(wide);
}

}  // namespace iterfix::internal
