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

#include "iterfix/subprocess.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>
#include <vector>

#include "iterfix/error.h"
#include "iterfix/text.h"

extern char **environ;

namespace iterfix {

namespace {

[[noreturn]] void HarnessFault(const std::string &what) {
  throw Error(ErrorCode::kHarnessFault, what + ": " + std::strerror(errno));
}

std::vector<std::string> BuildEnvironment(
    const std::map<std::string, std::string> &overrides) {
  std::vector<std::string> env;
  for (char **entry = environ; entry != nullptr && *entry != nullptr;
       ++entry) {
    const std::string_view kv(*entry);
    const std::string key(kv.substr(0, kv.find('=')));
    if (overrides.count(key) == 0) env.emplace_back(kv);
  }
  for (const auto &[key, value] : overrides) env.push_back(key + "=" + value);
  return env;
}

}  // namespace

std::string ExitStatus::Describe() const {
  if (timed_out) return "timed out";
  if (signaled) {
    const char *name = strsignal(signal);
    return "killed by signal " + std::to_string(signal) +
           (name != nullptr ? std::string(" (") + name + ")" : "");
  }
  std::string out = "exit status " + std::to_string(code);
  if (code > 128 && code < 128 + 32) {
    // /bin/sh reports a child killed by signal N as 128+N.
    const char *name = strsignal(code - 128);
    out += " (shell-reported signal " + std::to_string(code - 128) +
           (name != nullptr ? std::string(", ") + name : "") + ")";
  }
  return out;
}

ProcessResult RunShellCommand(const std::string &command,
                              const ProcessOptions &options) {
  // Everything the child touches is prepared before fork(): the engine
  // verifies variants from several threads.
  const int out_fd = ::open(options.stdout_path.c_str(),
                            O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (out_fd < 0) HarnessFault("cannot create " + options.stdout_path.string());
  const int err_fd = ::open(options.stderr_path.c_str(),
                            O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (err_fd < 0) {
    ::close(out_fd);
    HarnessFault("cannot create " + options.stderr_path.string());
  }
  const int null_fd = ::open("/dev/null", O_RDONLY | O_CLOEXEC);

  std::vector<std::string> env_storage = BuildEnvironment(options.env);
  std::vector<char *> envp;
  for (std::string &kv : env_storage) envp.push_back(kv.data());
  envp.push_back(nullptr);
  std::string shell = "/bin/sh";
  std::string dash_c = "-c";
  std::string cmd = command;
  char *argv[] = {shell.data(), dash_c.data(), cmd.data(), nullptr};
  const std::string cwd = options.cwd.string();

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_fd);
    ::close(err_fd);
    if (null_fd >= 0) ::close(null_fd);
    HarnessFault("fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (null_fd >= 0) ::dup2(null_fd, STDIN_FILENO);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(err_fd, STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(127);
    ::execve(shell.c_str(), argv, envp.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_fd);
  ::close(err_fd);
  if (null_fd >= 0) ::close(null_fd);

  ProcessResult result;
  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(options.timeout_s));
  int wstatus = 0;
  auto backoff = std::chrono::microseconds(200);
  while (true) {
    const pid_t done = ::waitpid(pid, &wstatus, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) HarnessFault("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
      }
      result.status.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, std::chrono::microseconds(10'000));
  }
  // Reap stragglers left in the group.
  ::kill(-pid, SIGKILL);
  result.elapsed_s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  if (!result.status.timed_out) {
    if (WIFEXITED(wstatus)) {
      result.status.exited = true;
      result.status.code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
      result.status.signaled = true;
      result.status.signal = WTERMSIG(wstatus);
    }
  }
  result.stdout_text = ReadFile(options.stdout_path);
  result.stderr_text = ReadFile(options.stderr_path);
  return result;
}

}  // namespace iterfix
