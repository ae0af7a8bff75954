// Copyright 2026 The specbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specbridge/sandbox/process.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <system_error>
#include <thread>

#include "specbridge/core/text.h"

extern char** environ;

namespace specbridge {

namespace {

using Clock = std::chrono::steady_clock;

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd(o.fd) { o.fd = -1; }
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw std::system_error(errno, std::generic_category(), "pipe2");
  }
  read_end.fd = fds[0];
  write_end.fd = fds[1];
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::string resolve_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) return name;
  const char* path = std::getenv("PATH");
  for (const auto& dir : split(path ? path : "/usr/bin:/bin", ':')) {
    const std::string candidate = (dir.empty() ? std::string(".") : dir) + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return {};
}

std::vector<std::string> build_env(const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    const auto eq = entry.find('=');
    const std::string key(entry.substr(0, eq));
    if (!overrides.contains(key)) env.emplace_back(entry);
  }
  for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
  return env;
}

void append_capped(std::string& sink, bool& truncated, const char* data, std::size_t n,
                   std::size_t cap) {
  if (sink.size() >= cap) {
    truncated = truncated || n > 0;
    return;
  }
  const std::size_t room = cap - sink.size();
  if (n > room) {
    sink.append(data, room);
    truncated = true;
  } else {
    sink.append(data, n);
  }
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  ProcessResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    result.stderr_data = "empty command";
    return result;
  }
  const std::string exe = resolve_executable(argv[0]);
  if (exe.empty()) {
    result.spawn_failed = true;
    result.stderr_data = argv[0] + ": command not found";
    return result;
  }

  // Everything the child touches is prepared before fork.
  std::vector<std::string> env_storage = build_env(options.env);
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::vector<std::string> argv_storage = argv;
  std::vector<char*> args;
  for (auto& a : argv_storage) args.push_back(a.data());
  args.push_back(nullptr);
  const std::string cwd = options.cwd.string();

  Fd in_r, in_w, out_r, out_w, err_r, err_w, exec_r, exec_w;
  make_pipe(in_r, in_w);
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);
  make_pipe(exec_r, exec_w);

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_r.fd, STDIN_FILENO);
    ::dup2(out_w.fd, STDOUT_FILENO);
    ::dup2(err_w.fd, STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      const int e = errno;
      (void)!::write(exec_w.fd, &e, sizeof e);
      ::_exit(127);
    }
    if (options.memory_limit > 0) {
      struct rlimit rl {};
      rl.rlim_cur = rl.rlim_max = options.memory_limit;
      ::setrlimit(RLIMIT_AS, &rl);
    }
    ::execve(exe.c_str(), args.data(), envp.data());
    const int e = errno;
    (void)!::write(exec_w.fd, &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in_r.reset();
  out_w.reset();
  err_w.reset();
  exec_w.reset();

  int exec_errno = 0;
  if (::read(exec_r.fd, &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    result.spawn_failed = true;
    result.stderr_data = argv[0] + ": " + std::strerror(exec_errno);
    return result;
  }

  set_nonblocking(in_w.fd);
  set_nonblocking(out_r.fd);
  set_nonblocking(err_r.fd);
  std::size_t stdin_off = 0;
  if (options.stdin_data.empty()) in_w.reset();

  const auto deadline = start + options.timeout;
  std::array<char, 65536> buf{};
  bool killed = false;
  auto kill_group = [&] {
    if (!killed) {
      ::kill(-pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
  };

  while (out_r.fd >= 0 || err_r.fd >= 0) {
    std::vector<pollfd> fds;
    if (in_w.fd >= 0) fds.push_back({in_w.fd, POLLOUT, 0});
    if (out_r.fd >= 0) fds.push_back({out_r.fd, POLLIN, 0});
    if (err_r.fd >= 0) fds.push_back({err_r.fd, POLLIN, 0});
    const auto now = Clock::now();
    if (now >= deadline) {
      kill_group();
      // Pipes may stay open in orphaned grandchildren; stop reading.
      break;
    }
    const int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    const int rc = ::poll(fds.data(), fds.size(), wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "poll");
    }
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in_w.fd) {
        if (p.revents & (POLLERR | POLLHUP)) {
          in_w.reset();
          continue;
        }
        const ssize_t n = ::write(in_w.fd, options.stdin_data.data() + stdin_off,
                                  options.stdin_data.size() - stdin_off);
        if (n > 0) stdin_off += static_cast<std::size_t>(n);
        if ((n < 0 && errno != EAGAIN) || stdin_off >= options.stdin_data.size()) in_w.reset();
        continue;
      }
      const bool is_out = p.fd == out_r.fd;
      Fd& src = is_out ? out_r : err_r;
      const ssize_t n = ::read(src.fd, buf.data(), buf.size());
      if (n > 0) {
        if (is_out) {
          append_capped(result.stdout_data, result.stdout_truncated, buf.data(),
                        static_cast<std::size_t>(n), options.max_output_bytes);
        } else {
          append_capped(result.stderr_data, result.stderr_truncated, buf.data(),
                        static_cast<std::size_t>(n), options.max_output_bytes);
        }
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        src.reset();
      }
    }
  }
  in_w.reset();

  int status = 0;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, killed ? 0 : WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      kill_group();
      continue;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  // Reap stragglers left in the group (background children).
  ::kill(-pid, SIGKILL);

  result.duration =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace specbridge
