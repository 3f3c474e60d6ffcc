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

// Language-model backends. The engine only needs one call: complete a
// (system, user) message pair into text.

#ifndef ITERFIX_BACKEND_H_
#define ITERFIX_BACKEND_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace iterfix {

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  // Throws Error(kBackendError) on transport failures and timeouts.
  virtual std::string Complete(const std::string &system,
                               const std::string &user, double temperature,
                               std::optional<std::int64_t> seed) = 0;
};

// Replays canned responses. Call n (1-based, counted across the whole
// backend) with user-message digest d is answered from the first file that
// exists among
//
//   <dir>/<d>/<k>.txt      k = how many times d has been asked so far
//   <dir>/<d>/<k>.error    -> BackendError with the file's text
//   <dir>/ordered/<n>.txt
//   <dir>/ordered/<n>.error
//
// Ordinals are assigned under a lock, so playback is deterministic for a
// deterministic call order.
class ScriptedBackend : public GeneratorBackend {
 public:
  explicit ScriptedBackend(std::filesystem::path responses_dir);

  std::string Complete(const std::string &system, const std::string &user,
                       double temperature,
                       std::optional<std::int64_t> seed) override;

  int calls() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  int calls_ = 0;
  std::map<std::string, int> per_digest_;
};

struct LiveBackendConfig {
  // Full URL of the chat-completions endpoint, e.g.
  // https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string model;
  std::string api_key;  // environment only, never persisted
  double timeout_s = 120;
};

// HTTP JSON chat-completion client:
//   POST {model, messages: [{role, content}...], temperature, seed?}
//   -> choices[0].message.content
class LiveBackend : public GeneratorBackend {
 public:
  explicit LiveBackend(LiveBackendConfig config);

  std::string Complete(const std::string &system, const std::string &user,
                       double temperature,
                       std::optional<std::int64_t> seed) override;

 private:
  LiveBackendConfig config_;
};

// Counts calls that reach the wrapped backend, failed ones included.
class CountingBackend : public GeneratorBackend {
 public:
  explicit CountingBackend(GeneratorBackend &inner) : inner_(inner) {}

  std::string Complete(const std::string &system, const std::string &user,
                       double temperature,
                       std::optional<std::int64_t> seed) override {
    ++calls_;
    return inner_.Complete(system, user, temperature, seed);
  }

  int calls() const { return calls_.load(); }

 private:
  GeneratorBackend &inner_;
  std::atomic<int> calls_{0};
};

}  // namespace iterfix

#endif  // ITERFIX_BACKEND_H_
