#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safegen {

struct RunOptions {
  std::chrono::milliseconds timeout{60000};
  std::size_t output_cap = 1 << 20;  // bytes kept; the rest is drained
  std::optional<std::filesystem::path> cwd;
};

struct CommandResult {
  bool launched = false;  // false: exec failed (binary missing, not executable)
  bool timed_out = false;
  bool signaled = false;
  int exit_code = -1;
  int signal = 0;
  bool truncated = false;
  std::string output;  // stdout and stderr interleaved
  std::chrono::milliseconds duration{0};
  std::string launch_error;

  bool ok() const noexcept { return launched && !timed_out && !signaled && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup) with stdin closed. The child gets its own
/// process group, which is killed wholesale on timeout.
CommandResult run_command(const std::vector<std::string>& argv, const RunOptions& options = {});

/// Long-lived child with line-oriented pipes on stdin/stdout. stderr is
/// inherited. The destructor kills and reaps the child.
class ChildProcess {
 public:
  /// Throws ControllerCrashed if the program cannot be started.
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&&) = delete;

  /// Writes `line` plus '\n'. Returns false if the child closed its stdin.
  bool write_line(std::string_view line);

  /// Next line without its terminator; nullopt on EOF or when `timeout`
  /// elapses (see timed_out()).
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  bool timed_out() const noexcept { return timed_out_; }

  void close_stdin();

  /// Waits up to `timeout` for exit; returns the exit code, or nullopt if
  /// still running (or killed by a signal).
  std::optional<int> wait(std::chrono::milliseconds timeout);

  void kill();
  pid_t pid() const noexcept { return pid_; }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool reaped_ = false;
  bool timed_out_ = false;
  std::string buffer_;
};

/// Replaces occurrences of `{name}` in each argument. An argument that is
/// exactly `{name}` for a list-valued placeholder expands to several
/// arguments. Throws ConfigError on unknown placeholders.
struct TemplateVars {
  std::vector<std::pair<std::string, std::string>> scalars;
  std::vector<std::pair<std::string, std::vector<std::string>>> lists;
};

std::vector<std::string> expand_command(const std::vector<std::string>& templ,
                                        const TemplateVars& vars);

}  // namespace safegen
