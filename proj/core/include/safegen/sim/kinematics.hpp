#pragma once

namespace safegen::sim {

/// Physical constants of the two-vehicle world.
struct SimConstants {
  double dt = 0.05;              // s
  double a_max = 3.0;            // full-throttle acceleration, m/s^2
  double b_max = 8.0;            // full-brake deceleration, m/s^2
  double v_max = 30.0;           // m/s
  double vehicle_length = 4.5;   // m
};

struct VehicleState {
  double position = 0.0;      // m
  double speed = 0.0;         // m/s, never negative
  double acceleration = 0.0;  // m/s^2, realized over the last step

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Required clearance max(c_min, tau_min * v).
double min_clearance(double c_min, double tau_min, double v) noexcept;

/// Semi-implicit Euler with the speed clamped to [0, v_max]. The recorded
/// acceleration is the realized one, (v' - v) / dt.
VehicleState step_dynamics(const VehicleState& state, double a_cmd, double dt,
                           double v_max = SimConstants{}.v_max) noexcept;

/// Bumper-to-bumper distance; the only definition of gap used anywhere.
double gap_between(const VehicleState& lead, const VehicleState& ego, double vehicle_length) noexcept;

}  // namespace safegen::sim
