#pragma once

#include "safegen/sim/kinematics.hpp"
#include "safegen/sim/protocol.hpp"
#include "safegen/spec_model.hpp"

namespace safegen::sim {

struct ReferenceGains {
  double kp = 1.0;              // 1/s^2, on gap error
  double kd = 1.8;              // 1/s, on relative speed
  double decel_fraction = 0.96; // of a_limit, caps the commanded deceleration
};

/// PD gap keeper around the nominal distance. Declares an emergency while
/// the gap is below the required clearance; braking stays within the
/// normal limit even then.
class ReferenceController {
 public:
  explicit ReferenceController(const BehaviorSpec& behavior, const SimConstants& constants = {},
                               const ReferenceGains& gains = {});

  ControllerCommand command(const TickMessage& tick) const;

 private:
  BehaviorSpec behavior_;
  SimConstants constants_;
  ReferenceGains gains_;
};

/// In-process endpoint speaking the wire protocol through a loopback channel.
ControllerEndpoint reference_endpoint(const BehaviorSpec& behavior,
                                      const SimConstants& constants = {},
                                      const ReferenceGains& gains = {});

}  // namespace safegen::sim
