#include "safegen/sim/reference_controller.hpp"

#include <algorithm>

namespace safegen::sim {

ReferenceController::ReferenceController(const BehaviorSpec& behavior, const SimConstants& constants,
                                         const ReferenceGains& gains)
    : behavior_(behavior), constants_(constants), gains_(gains) {}

ControllerCommand ReferenceController::command(const TickMessage& tick) const {
  ControllerCommand cmd;
  cmd.emergency = tick.gap < min_clearance(behavior_.c_min, behavior_.tau_min, tick.ego_v);
  double desired = gains_.kp * (tick.gap - behavior_.nominal_distance) + gains_.kd * tick.rel_v;
  desired = std::clamp(desired, -gains_.decel_fraction * behavior_.a_limit, constants_.a_max);
  if (desired >= 0.0) {
    cmd.throttle = desired / constants_.a_max;
  } else {
    // Mirror the harness brake authority so the deceleration is what we asked for.
    const double authority =
        cmd.emergency ? constants_.b_max : std::min(constants_.b_max, behavior_.a_limit);
    cmd.brake = std::min(1.0, -desired / authority);
  }
  return cmd;
}

ControllerEndpoint reference_endpoint(const BehaviorSpec& behavior, const SimConstants& constants,
                                      const ReferenceGains& gains) {
  const ReferenceController controller(behavior, constants, gains);
  return ControllerEndpoint::loopback("reference", [controller] {
    return make_policy_responder("reference",
                                 [controller](const TickMessage& t) { return controller.command(t); });
  });
}

}  // namespace safegen::sim
