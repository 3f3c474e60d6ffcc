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

#include "iterfix/backend.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "iterfix/error.h"
#include "iterfix/text.h"
#include "json.hpp"

namespace iterfix {

namespace fs = std::filesystem;

ScriptedBackend::ScriptedBackend(fs::path responses_dir)
    : dir_(std::move(responses_dir)) {}

int ScriptedBackend::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::string ScriptedBackend::Complete(const std::string & /*system*/,
                                      const std::string &user,
                                      double /*temperature*/,
                                      std::optional<std::int64_t> /*seed*/) {
  const std::string digest = Sha256Hex(user);
  int global = 0;
  int local = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    global = ++calls_;
    local = ++per_digest_[digest];
  }
  const fs::path candidates[] = {
      dir_ / digest / (std::to_string(local) + ".txt"),
      dir_ / digest / (std::to_string(local) + ".error"),
      dir_ / "ordered" / (std::to_string(global) + ".txt"),
      dir_ / "ordered" / (std::to_string(global) + ".error"),
  };
  for (const fs::path &path : candidates) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) continue;
    std::string text = ReadFile(path);
    if (path.extension() == ".error") {
      throw Error(ErrorCode::kBackendError,
                  "scripted failure for call " + std::to_string(global) +
                      ": " + std::string(Trim(text)));
    }
    return text;
  }
  throw Error(ErrorCode::kBackendError,
              "no scripted response for call " + std::to_string(global) +
                  " (digest " + digest + ") under " + dir_.string());
}

LiveBackend::LiveBackend(LiveBackendConfig config)
    : config_(std::move(config)) {}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint SplitEndpoint(const std::string &url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kConfigError, "endpoint must be an http(s) URL: " +
                                             url);
  }
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::string LiveBackend::Complete(const std::string &system,
                                  const std::string &user, double temperature,
                                  std::optional<std::int64_t> seed) {
  if (config_.endpoint.empty() || config_.model.empty()) {
    throw Error(ErrorCode::kConfigError,
                "live backend needs an endpoint and a model");
  }
  const Endpoint endpoint = SplitEndpoint(config_.endpoint);
  nlohmann::json request = {
      {"model", config_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", system}},
                              {{"role", "user"}, {"content", user}}})},
      {"temperature", temperature},
  };
  if (seed) request["seed"] = *seed;

  httplib::Client client(endpoint.origin);
  const auto seconds = static_cast<time_t>(config_.timeout_s);
  const auto usec =
      static_cast<time_t>((config_.timeout_s - static_cast<double>(seconds)) *
                          1e6);
  client.set_connection_timeout(seconds, usec);
  client.set_read_timeout(seconds, usec);
  client.set_write_timeout(seconds, usec);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const httplib::Result result =
      client.Post(endpoint.path, headers, request.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kBackendError,
                "request to " + config_.endpoint +
                    " failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kBackendError,
                "HTTP " + std::to_string(result->status) + " from " +
                    config_.endpoint + ": " + TailExcerpt(result->body, 512));
  }
  const nlohmann::json body =
      nlohmann::json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.contains("choices") ||
      !body["choices"].is_array() || body["choices"].empty()) {
    throw Error(ErrorCode::kBackendError, "malformed completion response");
  }
  const nlohmann::json &choice = body["choices"][0];
  if (!choice.is_object() || !choice.contains("message")) {
    throw Error(ErrorCode::kBackendError, "completion has no message");
  }
  const nlohmann::json &message = choice["message"];
  if (!message.is_object() || !message.contains("content") ||
      !message["content"].is_string()) {
    throw Error(ErrorCode::kBackendError, "completion has no message content");
  }
  return message["content"].get<std::string>();
}

}  // namespace iterfix
