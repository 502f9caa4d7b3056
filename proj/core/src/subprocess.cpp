#include "safegen/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "safegen/errors.hpp"

namespace safegen {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::vector<char*> make_argv(const std::vector<std::string>& argv) {
  std::vector<char*> out;
  out.reserve(argv.size() + 1);
  for (const auto& a : argv) out.push_back(const_cast<char*>(a.c_str()));
  out.push_back(nullptr);
  return out;
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

/// Reads the errno the child reports when exec fails; 0 means exec succeeded.
int read_exec_status(int fd) {
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(fd, &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  return n == static_cast<ssize_t>(sizeof child_errno) ? child_errno : 0;
}

[[noreturn]] void exec_child(const std::vector<std::string>& argv, int status_fd) {
  auto cargv = make_argv(argv);
  ::execvp(cargv[0], cargv.data());
  const int err = errno;
  [[maybe_unused]] auto ignored = ::write(status_fd, &err, sizeof err);
  ::_exit(127);
}

std::chrono::milliseconds remaining(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? left : std::chrono::milliseconds(0);
}

}  // namespace

CommandResult run_command(const std::vector<std::string>& argv, const RunOptions& options) {
  CommandResult result;
  if (argv.empty() || argv.front().empty()) {
    result.launch_error = "empty command";
    return result;
  }
  const auto started = Clock::now();

  int out_pipe[2];
  int status_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    result.launch_error = std::strerror(errno);
    return result;
  }
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
    result.launch_error = std::strerror(errno);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    return result;
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    result.launch_error = std::strerror(errno);
    for (int fd : {out_pipe[0], out_pipe[1], status_pipe[0], status_pipe[1]}) ::close(fd);
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(out_pipe[1], STDERR_FILENO);
    if (options.cwd && ::chdir(options.cwd->c_str()) != 0) {
      const int err = errno;
      [[maybe_unused]] auto ignored = ::write(status_pipe[1], &err, sizeof err);
      ::_exit(127);
    }
    exec_child(argv, status_pipe[1]);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(status_pipe[1]);

  const int exec_errno = read_exec_status(status_pipe[0]);
  ::close(status_pipe[0]);
  if (exec_errno != 0) {
    ::waitpid(pid, nullptr, 0);
    ::close(out_pipe[0]);
    result.launch_error = "cannot execute '" + argv.front() + "': " + std::strerror(exec_errno);
    result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    return result;
  }
  result.launched = true;

  const auto deadline = started + options.timeout;
  int status = 0;
  bool exited = false;
  bool eof = false;
  char buf[8192];
  while (!exited || !eof) {
    if (!eof) {
      pollfd pfd{out_pipe[0], POLLIN, 0};
      const auto wait_ms = std::min<long long>(remaining(deadline).count(), 50);
      const int pr = ::poll(&pfd, 1, static_cast<int>(wait_ms));
      if (pr > 0) {
        const ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
        if (n > 0) {
          const std::size_t room = options.output_cap > result.output.size()
                                       ? options.output_cap - result.output.size()
                                       : 0;
          const std::size_t take = std::min<std::size_t>(room, static_cast<std::size_t>(n));
          result.output.append(buf, take);
          if (take < static_cast<std::size_t>(n)) result.truncated = true;
        } else if (n == 0 || (n < 0 && errno != EINTR && errno != EAGAIN)) {
          eof = true;
        }
      }
    }
    if (!exited) {
      const pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) {
        exited = true;
        // Stragglers in the group may still hold the pipe open.
        ::kill(-pid, SIGKILL);
      }
    }
    if (exited && !eof) {
      // Drain whatever is already buffered, then stop.
      pollfd pfd{out_pipe[0], POLLIN, 0};
      if (::poll(&pfd, 1, 0) <= 0) eof = true;
    }
    if (!exited && Clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      exited = true;
      eof = true;
    } else if (eof && !exited) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }
  ::close(out_pipe[0]);

  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.signaled = true;
      result.signal = WTERMSIG(status);
    }
  }
  result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  return result;
}

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
  ignore_sigpipe_once();
  if (argv.empty() || argv.front().empty()) throw ControllerCrashed("empty controller command");

  int in_pipe[2];
  int out_pipe[2];
  int status_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ControllerCrashed(std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ControllerCrashed(std::strerror(errno));
  }
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw ControllerCrashed(std::strerror(errno));
  }

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], status_pipe[0], status_pipe[1]}) {
      ::close(fd);
    }
    throw ControllerCrashed(std::strerror(errno));
  }
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    exec_child(argv, status_pipe[1]);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(status_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  const int exec_errno = read_exec_status(status_pipe[0]);
  ::close(status_pipe[0]);
  if (exec_errno != 0) {
    ::waitpid(pid_, nullptr, 0);
    reaped_ = true;
    close_fd(to_child_);
    close_fd(from_child_);
    throw ControllerCrashed("cannot execute '" + argv.front() + "': " + std::strerror(exec_errno));
  }
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept
    : pid_(other.pid_),
      to_child_(other.to_child_),
      from_child_(other.from_child_),
      reaped_(other.reaped_),
      timed_out_(other.timed_out_),
      buffer_(std::move(other.buffer_)) {
  other.pid_ = -1;
  other.to_child_ = -1;
  other.from_child_ = -1;
  other.reaped_ = true;
}

ChildProcess::~ChildProcess() {
  close_fd(to_child_);
  close_fd(from_child_);
  kill();
}

bool ChildProcess::write_line(std::string_view line) {
  if (to_child_ < 0) return false;
  std::string data(line);
  data.push_back('\n');
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    written += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> ChildProcess::read_line(std::chrono::milliseconds timeout) {
  timed_out_ = false;
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (from_child_ < 0) {
      // A final line without a terminator still counts.
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      if (line.back() == '\r') line.pop_back();
      return line;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(remaining(deadline).count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      return std::nullopt;
    }
    if (pr == 0) {
      timed_out_ = true;
      return std::nullopt;
    }
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      close_fd(from_child_);
      continue;
    }
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

void ChildProcess::close_stdin() { close_fd(to_child_); }

std::optional<int> ChildProcess::wait(std::chrono::milliseconds timeout) {
  if (reaped_ || pid_ <= 0) return std::nullopt;
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    int status = 0;
    const pid_t w = ::waitpid(pid_, &status, WNOHANG);
    if (w == pid_) {
      reaped_ = true;
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return std::nullopt;
    }
    if (Clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

void ChildProcess::kill() {
  if (reaped_ || pid_ <= 0) return;
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
  reaped_ = true;
}

std::vector<std::string> expand_command(const std::vector<std::string>& templ,
                                        const TemplateVars& vars) {
  auto find_scalar = [&](std::string_view name) -> const std::string* {
    for (const auto& [k, v] : vars.scalars) {
      if (k == name) return &v;
    }
    return nullptr;
  };
  auto find_list = [&](std::string_view name) -> const std::vector<std::string>* {
    for (const auto& [k, v] : vars.lists) {
      if (k == name) return &v;
    }
    return nullptr;
  };

  std::vector<std::string> out;
  for (const auto& arg : templ) {
    if (arg.size() > 2 && arg.front() == '{' && arg.back() == '}' &&
        arg.find('{', 1) == std::string::npos) {
      if (const auto* list = find_list(std::string_view(arg).substr(1, arg.size() - 2))) {
        out.insert(out.end(), list->begin(), list->end());
        continue;
      }
    }
    std::string expanded;
    for (std::size_t i = 0; i < arg.size();) {
      if (arg.compare(i, 2, "{{") == 0) {
        expanded.push_back('{');
        i += 2;
      } else if (arg.compare(i, 2, "}}") == 0) {
        expanded.push_back('}');
        i += 2;
      } else if (arg[i] == '{') {
        const auto close = arg.find('}', i);
        if (close == std::string::npos) throw ConfigError("unterminated placeholder in '" + arg + "'");
        const std::string name = arg.substr(i + 1, close - i - 1);
        if (const auto* value = find_scalar(name)) {
          expanded += *value;
        } else if (find_list(name)) {
          throw ConfigError("list placeholder {" + name + "} must be a whole argument");
        } else {
          throw ConfigError("unknown placeholder {" + name + "} in '" + arg + "'");
        }
        i = close + 1;
      } else {
        expanded.push_back(arg[i++]);
      }
    }
    out.push_back(std::move(expanded));
  }
  return out;
}

}  // namespace safegen
