#include "safegen/sim/protocol.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen::sim {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto sp = line.find(' ');
    out.push_back(line.substr(0, sp));
    if (sp == std::string_view::npos) break;
    line.remove_prefix(sp + 1);
  }
  return out;
}

double parse_number(std::string_view token, std::string_view line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw ProtocolViolation("bad number '" + std::string(token) + "' in '" + std::string(line) + "'");
  }
  return v;
}

}  // namespace

std::string encode_tick(const TickMessage& m) {
  return detail::format("TICK %.3f %.4f %.4f %.4f %.4f", m.t, m.ego_v, m.ego_a, m.gap, m.rel_v);
}

std::string encode_command(const ControllerCommand& c) {
  return detail::format("CMD %.4f %.4f%s", c.throttle, c.brake, c.emergency ? " EMERGENCY" : "");
}

std::string encode_ready(std::string_view name) { return "READY " + std::string(name); }

ControllerCommand parse_command(std::string_view line) {
  const auto tok = split_tokens(line);
  if (tok.empty() || tok[0] != "CMD") {
    throw ProtocolViolation("expected CMD, got '" + std::string(line) + "'");
  }
  if (tok.size() != 3 && !(tok.size() == 4 && tok[3] == "EMERGENCY")) {
    throw ProtocolViolation("malformed CMD line '" + std::string(line) + "'");
  }
  ControllerCommand c;
  c.throttle = parse_number(tok[1], line);
  c.brake = parse_number(tok[2], line);
  c.emergency = tok.size() == 4;
  if (c.throttle < 0.0 || c.throttle > 1.0) {
    throw ProtocolViolation("throttle out of range in '" + std::string(line) + "'");
  }
  if (c.brake < 0.0 || c.brake > 1.0) {
    throw ProtocolViolation("brake out of range in '" + std::string(line) + "'");
  }
  return c;
}

std::string parse_ready(std::string_view line) {
  if (!line.starts_with("READY ") || line.size() == 6) {
    throw ProtocolViolation("expected 'READY <name>', got '" + std::string(line) + "'");
  }
  return std::string(line.substr(6));
}

HarnessMessage parse_harness_message(std::string_view line) {
  if (line == kHello) return HelloMessage{};
  if (line == kEnd) return EndMessage{};
  const auto tok = split_tokens(line);
  if (tok.size() == 6 && tok[0] == "TICK") {
    return TickMessage{parse_number(tok[1], line), parse_number(tok[2], line),
                       parse_number(tok[3], line), parse_number(tok[4], line),
                       parse_number(tok[5], line)};
  }
  throw ProtocolViolation("unexpected harness message '" + std::string(line) + "'");
}

std::optional<int> ProcessChannel::finish(std::chrono::milliseconds timeout) {
  child_.close_stdin();
  auto code = child_.wait(timeout);
  if (!code) child_.kill();
  return code;
}

bool LoopbackChannel::send(std::string_view line) {
  if (auto reply = responder_(line)) pending_.push_back(std::move(*reply));
  return true;
}

std::optional<std::string> LoopbackChannel::receive(std::chrono::milliseconds) {
  if (pending_.empty()) return std::nullopt;
  std::string line = std::move(pending_.front());
  pending_.erase(pending_.begin());
  return line;
}

ControllerEndpoint ControllerEndpoint::process(std::vector<std::string> argv) {
  ControllerEndpoint e;
  for (const auto& a : argv) {
    if (!e.description.empty()) e.description += ' ';
    e.description += a;
  }
  e.open = [argv = std::move(argv)]() -> std::unique_ptr<ControllerChannel> {
    return std::make_unique<ProcessChannel>(argv);
  };
  return e;
}

ControllerEndpoint ControllerEndpoint::loopback(
    std::string name, std::function<LoopbackChannel::Responder()> make_responder) {
  ControllerEndpoint e;
  e.description = "builtin:" + name;
  e.open = [make = std::move(make_responder)]() -> std::unique_ptr<ControllerChannel> {
    return std::make_unique<LoopbackChannel>(make());
  };
  return e;
}

LoopbackChannel::Responder make_policy_responder(
    std::string name, std::function<ControllerCommand(const TickMessage&)> policy) {
  return [name = std::move(name), policy = std::move(policy)](std::string_view line)
             -> std::optional<std::string> {
    const auto msg = parse_harness_message(line);
    if (std::holds_alternative<HelloMessage>(msg)) return encode_ready(name);
    if (const auto* tick = std::get_if<TickMessage>(&msg)) return encode_command(policy(*tick));
    return std::nullopt;
  };
}

int serve_controller(std::istream& in, std::ostream& out, std::string_view name,
                     const std::function<ControllerCommand(const TickMessage&)>& policy) {
  const auto respond = make_policy_responder(std::string(name), policy);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      if (line == kEnd) return 0;
      if (auto reply = respond(line)) out << *reply << '\n' << std::flush;
    } catch (const ProtocolViolation&) {
      return 1;
    }
  }
  return 1;
}

}  // namespace safegen::sim
