#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "safegen/sim/kinematics.hpp"

namespace safegen::sim {

struct ControllerCommand {
  double throttle = 0.0;  // [0, 1]
  double brake = 0.0;     // [0, 1]
  bool emergency = false;

  friend bool operator==(const ControllerCommand&, const ControllerCommand&) = default;
};

/// State after one tick, stamped with the time it holds (t = (k + 1) * dt).
struct Sample {
  double t = 0.0;
  VehicleState ego;
  VehicleState lead;
  double gap = 0.0;
  double relative_speed = 0.0;  // lead minus ego
  ControllerCommand command;    // the command that produced this state
  double latency_ms = 0.0;      // 0 when latency is not measured

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Telemetry {
  double dt = SimConstants{}.dt;
  std::vector<Sample> samples;
  bool collided = false;  // the last sample has gap <= 0
};

inline constexpr std::string_view kTelemetryHeader =
    "t,ego_x,ego_v,ego_a,lead_x,lead_v,gap,throttle,brake,emergency,latency_ms";

/// Every value uses 17 significant digits, so a file round-trips exactly.
std::string to_csv(const Telemetry& telemetry);

/// Inverse of to_csv. The lead acceleration is not persisted and reads back
/// as 0. Throws SyntaxError.
Telemetry parse_csv(std::string_view text);

void write_csv(const std::filesystem::path& path, const Telemetry& telemetry);
Telemetry read_csv(const std::filesystem::path& path);

}  // namespace safegen::sim
