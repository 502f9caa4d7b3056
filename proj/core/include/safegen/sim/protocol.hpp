#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "safegen/sim/telemetry.hpp"
#include "safegen/subprocess.hpp"

namespace safegen::sim {

// Line-oriented controller protocol:
//   harness -> controller: "HELLO v1", "TICK t ego_v ego_a gap rel_v", "END"
//   controller -> harness: "READY <name>", "CMD throttle brake [EMERGENCY]"

inline constexpr std::string_view kHello = "HELLO v1";
inline constexpr std::string_view kEnd = "END";

struct TickMessage {
  double t = 0.0;
  double ego_v = 0.0;
  double ego_a = 0.0;
  double gap = 0.0;
  double rel_v = 0.0;  // lead speed minus ego speed

  friend bool operator==(const TickMessage&, const TickMessage&) = default;
};

struct HelloMessage {
  friend bool operator==(const HelloMessage&, const HelloMessage&) = default;
};
struct EndMessage {
  friend bool operator==(const EndMessage&, const EndMessage&) = default;
};
using HarnessMessage = std::variant<HelloMessage, TickMessage, EndMessage>;

/// "TICK %.3f %.4f %.4f %.4f %.4f"
std::string encode_tick(const TickMessage& tick);
/// "CMD %.4f %.4f" with " EMERGENCY" appended when flagged.
std::string encode_command(const ControllerCommand& cmd);
std::string encode_ready(std::string_view name);

/// Throws ProtocolViolation on anything but a well-formed CMD line with both
/// values finite and in [0, 1].
ControllerCommand parse_command(std::string_view line);
/// Returns the controller name. Throws ProtocolViolation.
std::string parse_ready(std::string_view line);
/// Controller side. Throws ProtocolViolation.
HarnessMessage parse_harness_message(std::string_view line);

/// One live connection to a controller.
class ControllerChannel {
 public:
  virtual ~ControllerChannel() = default;
  /// Returns false if the controller is gone.
  virtual bool send(std::string_view line) = 0;
  /// nullopt on EOF or timeout; timed_out() tells which.
  virtual std::optional<std::string> receive(std::chrono::milliseconds timeout) = 0;
  virtual bool timed_out() const = 0;
  /// After END: the controller's exit status, or nullopt if it did not exit
  /// cleanly within `timeout`.
  virtual std::optional<int> finish(std::chrono::milliseconds timeout) = 0;
};

/// Controller running as a child process on stdin/stdout.
class ProcessChannel final : public ControllerChannel {
 public:
  explicit ProcessChannel(const std::vector<std::string>& argv) : child_(argv) {}
  bool send(std::string_view line) override { return child_.write_line(line); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override {
    return child_.read_line(timeout);
  }
  bool timed_out() const override { return child_.timed_out(); }
  std::optional<int> finish(std::chrono::milliseconds timeout) override;

 private:
  ChildProcess child_;
};

/// In-process controller: each line sent is answered synchronously by the
/// responder, through the same codec a process would use.
class LoopbackChannel final : public ControllerChannel {
 public:
  using Responder = std::function<std::optional<std::string>(std::string_view)>;
  explicit LoopbackChannel(Responder responder) : responder_(std::move(responder)) {}
  bool send(std::string_view line) override;
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override;
  bool timed_out() const override { return false; }
  std::optional<int> finish(std::chrono::milliseconds) override { return 0; }

 private:
  Responder responder_;
  std::vector<std::string> pending_;
};

/// Recipe for opening a fresh channel per episode.
struct ControllerEndpoint {
  std::string description;
  std::function<std::unique_ptr<ControllerChannel>()> open;

  static ControllerEndpoint process(std::vector<std::string> argv);
  /// `make_responder` is called once per episode so responders may keep state.
  static ControllerEndpoint loopback(std::string name,
                                     std::function<LoopbackChannel::Responder()> make_responder);
};

/// Serves the protocol on a pair of streams using `policy`. Returns the
/// process exit code: 0 after END, 1 on malformed input or EOF.
int serve_controller(std::istream& in, std::ostream& out, std::string_view name,
                     const std::function<ControllerCommand(const TickMessage&)>& policy);

/// Responder for LoopbackChannel built from a policy.
LoopbackChannel::Responder make_policy_responder(
    std::string name, std::function<ControllerCommand(const TickMessage&)> policy);

}  // namespace safegen::sim
