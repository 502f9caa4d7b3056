#include "acc_api.h"

namespace {

constexpr double kCMin = 2.0;       // m
constexpr double kTauMin = 1.5;     // s
constexpr double kNominal = 10.0;   // m
constexpr double kALimit = 5.0;     // m/s^2
constexpr double kAMax = 3.0;       // m/s^2
constexpr double kBMax = 8.0;       // m/s^2
constexpr double kKp = 1.0;
constexpr double kKd = 1.8;
constexpr double kDecelFraction = 0.96;

double clampTo(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

double minClearance(double v) {
  const double dynamic = kTauMin * v;
  return dynamic > kCMin ? dynamic : kCMin;
}

}  // namespace

AccCommand computeAccCommand(double ego_speed, double ego_accel, double gap,
                             double relative_speed) {
  static_cast<void>(ego_accel);
  AccCommand cmd{0.0, 0.0, false};
  cmd.emergency = gap < minClearance(ego_speed);
  const double desired =
      clampTo(kKp * (gap - kNominal) + kKd * relative_speed, -kDecelFraction * kALimit, kAMax);
  if (desired >= 0.0) {
    cmd.throttle = desired / kAMax;
  } else {
    const double authority = cmd.emergency ? kBMax : (kBMax < kALimit ? kBMax : kALimit);
    cmd.brake = clampTo(-desired / authority, 0.0, 1.0);
  }
  return cmd;
}
