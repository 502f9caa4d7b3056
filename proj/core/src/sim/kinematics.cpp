#include "safegen/sim/kinematics.hpp"

#include <algorithm>

namespace safegen::sim {

double min_clearance(double c_min, double tau_min, double v) noexcept {
  return std::max(c_min, tau_min * v);
}

VehicleState step_dynamics(const VehicleState& state, double a_cmd, double dt, double v_max) noexcept {
  VehicleState next;
  next.speed = std::clamp(state.speed + a_cmd * dt, 0.0, v_max);
  next.position = state.position + next.speed * dt;
  next.acceleration = (next.speed - state.speed) / dt;
  return next;
}

double gap_between(const VehicleState& lead, const VehicleState& ego, double vehicle_length) noexcept {
  return lead.position - ego.position - vehicle_length;
}

}  // namespace safegen::sim
