#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "safegen/sim/evaluator.hpp"
#include "safegen/sim/kinematics.hpp"
#include "safegen/sim/lead_profile.hpp"
#include "safegen/sim/protocol.hpp"
#include "safegen/sim/telemetry.hpp"
#include "safegen/spec_model.hpp"

namespace safegen::sim {

struct SimConfig {
  SimConstants constants;
  LeadProfileConfig lead;
  double initial_speed = 15.0;  // both vehicles, m/s
  /// Hard bound on any single controller reply; exceeding it raises
  /// DeadlineExceeded whether or not a tick deadline is configured.
  std::chrono::milliseconds reply_timeout{2000};
  /// Record wall-clock latency even without a tick deadline. Off by default
  /// so telemetry stays byte-identical between runs.
  bool measure_latency = false;
  EvaluationOptions evaluation;
};

/// One lockstep episode. Throws ControllerCrashed, ProtocolViolation and
/// DeadlineExceeded; a collision ends the episode early and is not an error.
Telemetry run_episode(const ControllerEndpoint& controller, const BehaviorSpec& behavior,
                      const SimConfig& config, std::uint64_t seed);

struct IntegrationResult {
  bool passed = false;
  std::vector<EvaluationReport> reports;
  std::vector<Telemetry> telemetry;
  std::string feedback;  // empty when passed
};

/// Episodes with seeds behavior.seed + i for i < n_seeds. Throws
/// InvariantError when n_seeds is 0.
IntegrationResult run_integration_monitoring(const ControllerEndpoint& controller,
                                             const BehaviorSpec& behavior, std::size_t n_seeds,
                                             const SimConfig& config = {});

/// Failed criteria and worst margins per failed episode, without anything
/// about the lead profile.
std::string integration_feedback(const std::vector<EvaluationReport>& reports,
                                 const BehaviorSpec& behavior);

}  // namespace safegen::sim
