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

#include <gtest/gtest.h>

#include <thread>

// Same configuration as the library, so inline definitions agree.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "iterfix/error.h"
#include "iterfix/text.h"
#include "json.hpp"
#include "test_util.h"

namespace iterfix {
namespace {

using testing_util::TempDir;

TEST(ScriptedBackendTest, OrderedPlaybackUsesGlobalOrdinal) {
  TempDir dir;
  WriteFile(dir.path() / "ordered" / "1.txt", "first");
  WriteFile(dir.path() / "ordered" / "2.txt", "second");
  ScriptedBackend backend(dir.path());
  EXPECT_EQ(backend.Complete("s", "a", 0.0, std::nullopt), "first");
  EXPECT_EQ(backend.Complete("s", "b", 0.7, 3), "second");
  EXPECT_EQ(backend.calls(), 2);
  try {
    backend.Complete("s", "c", 0.0, std::nullopt);
    FAIL() << "expected BackendError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
  }
}

TEST(ScriptedBackendTest, DigestDirectoryTakesPrecedence) {
  TempDir dir;
  const std::string digest = Sha256Hex("prompt");
  WriteFile(dir.path() / digest / "1.txt", "by digest 1");
  WriteFile(dir.path() / digest / "2.txt", "by digest 2");
  WriteFile(dir.path() / "ordered" / "2.txt", "ordered 2");
  WriteFile(dir.path() / "ordered" / "3.txt", "ordered 3");
  ScriptedBackend backend(dir.path());
  EXPECT_EQ(backend.Complete("s", "prompt", 0.0, std::nullopt), "by digest 1");
  EXPECT_EQ(backend.Complete("s", "other", 0.0, std::nullopt), "ordered 2");
  EXPECT_EQ(backend.Complete("s", "prompt", 0.0, std::nullopt), "by digest 2");
}

TEST(ScriptedBackendTest, ErrorFileInjectsBackendError) {
  TempDir dir;
  WriteFile(dir.path() / "ordered" / "1.error", "simulated timeout");
  WriteFile(dir.path() / "ordered" / "2.txt", "ok");
  ScriptedBackend backend(dir.path());
  try {
    backend.Complete("s", "u", 0.0, std::nullopt);
    FAIL() << "expected BackendError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
    EXPECT_NE(std::string(e.what()).find("simulated timeout"),
              std::string::npos);
  }
  EXPECT_EQ(backend.Complete("s", "u", 0.0, std::nullopt), "ok");
}

TEST(ScriptedBackendTest, ConcurrentCallsGetDistinctOrdinals) {
  TempDir dir;
  constexpr int kCalls = 32;
  for (int i = 1; i <= kCalls; ++i) {
    WriteFile(dir.path() / "ordered" / (std::to_string(i) + ".txt"),
              std::to_string(i));
  }
  ScriptedBackend backend(dir.path());
  std::vector<std::string> got(kCalls);
  std::vector<std::thread> threads;
  for (int i = 0; i < kCalls; ++i) {
    threads.emplace_back([&, i] {
      got[i] = backend.Complete("s", "u", 0.0, std::nullopt);
    });
  }
  for (auto &t : threads) t.join();
  std::sort(got.begin(), got.end(), [](const auto &a, const auto &b) {
    return std::stoi(a) < std::stoi(b);
  });
  for (int i = 0; i < kCalls; ++i) EXPECT_EQ(got[i], std::to_string(i + 1));
}

TEST(CountingBackendTest, CountsFailuresToo) {
  TempDir dir;
  WriteFile(dir.path() / "ordered" / "1.txt", "x");
  ScriptedBackend inner(dir.path());
  CountingBackend counting(inner);
  counting.Complete("s", "u", 0.0, std::nullopt);
  EXPECT_THROW(counting.Complete("s", "u", 0.0, std::nullopt), Error);
  EXPECT_EQ(counting.calls(), 2);
}

class LiveBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request &req,
                                                httplib::Response &res) {
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = nlohmann::json::parse(req.body);
      if (last_body_["messages"][1]["content"] == "fail") {
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      }
      if (last_body_["messages"][1]["content"] == "malformed") {
        res.set_content("{\"choices\": [{}]}", "application/json");
        return;
      }
      nlohmann::json reply = {
          {"choices",
           {{{"message",
              {{"role", "assistant"},
               {"content", "echo:" + last_body_["messages"][1]["content"]
                                         .get<std::string>()}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  LiveBackendConfig Config() const {
    return {"http://127.0.0.1:" + std::to_string(port_) +
                "/v1/chat/completions",
            "test-model", "secret", 5};
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_auth_;
  nlohmann::json last_body_;
};

TEST_F(LiveBackendTest, SendsChatRequestAndReadsFirstChoice) {
  LiveBackend backend(Config());
  EXPECT_EQ(backend.Complete("sys", "hello", 0.7, 42), "echo:hello");
  EXPECT_EQ(last_auth_, "Bearer secret");
  EXPECT_EQ(last_body_["model"], "test-model");
  EXPECT_EQ(last_body_["messages"][0]["role"], "system");
  EXPECT_EQ(last_body_["messages"][0]["content"], "sys");
  EXPECT_EQ(last_body_["messages"][1]["role"], "user");
  EXPECT_DOUBLE_EQ(last_body_["temperature"].get<double>(), 0.7);
  EXPECT_EQ(last_body_["seed"], 42);

  backend.Complete("sys", "again", 0.0, std::nullopt);
  EXPECT_FALSE(last_body_.contains("seed"));
}

TEST_F(LiveBackendTest, HttpErrorsBecomeBackendErrors) {
  LiveBackend backend(Config());
  for (const char *user : {"fail", "malformed"}) {
    try {
      backend.Complete("sys", user, 0.0, std::nullopt);
      FAIL() << "expected BackendError for " << user;
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kBackendError);
    }
  }
}

TEST(LiveBackendNoServerTest, ConnectionFailureIsBackendError) {
  LiveBackendConfig config{"http://127.0.0.1:1/v1/chat/completions", "m", "",
                           1};
  LiveBackend backend(config);
  try {
    backend.Complete("s", "u", 0.0, std::nullopt);
    FAIL() << "expected BackendError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendError);
  }
}

TEST(LiveBackendNoServerTest, MissingModelIsConfigError) {
  LiveBackend backend(LiveBackendConfig{"http://127.0.0.1:1/x", "", "", 1});
  try {
    backend.Complete("s", "u", 0.0, std::nullopt);
    FAIL() << "expected ConfigError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

}  // namespace
}  // namespace iterfix
