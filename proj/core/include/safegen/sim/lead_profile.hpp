#pragma once

#include <cstdint>
#include <vector>

namespace safegen::sim {

/// xoshiro256** (Blackman & Vigna), state seeded from splitmix64. Kept
/// explicit so other implementations can reproduce lead profiles.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept;
  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() noexcept;

 private:
  std::uint64_t s_[4];
};

struct LeadSegment {
  double duration;      // s
  double acceleration;  // m/s^2

  friend bool operator==(const LeadSegment&, const LeadSegment&) = default;
};

struct LeadProfileConfig {
  double initial_speed = 15.0;
  double cruise_low = 1.0;   // steering envelope for segment end speeds
  double cruise_high = 5.0;
  double spread = 4.0;       // raw draws are U[-spread, spread]
  double min_duration = 2.0;
  double max_duration = 8.0;
  double accel_clamp = 4.0;
  double v_max = 30.0;
};

/// Piecewise-constant lead acceleration. Each segment draws a duration and
/// an acceleration; the sign and magnitude are then steered so the projected
/// end speed stays inside the cruise envelope.
struct LeadProfile {
  std::uint64_t seed = 0;
  std::vector<LeadSegment> segments;
  std::vector<double> segment_ends;  // cumulative, same length as segments

  static LeadProfile generate(std::uint64_t seed, double episode_duration,
                              const LeadProfileConfig& config = {});

  /// Acceleration commanded at time t (the last segment extends forever).
  double acceleration_at(double t) const noexcept;
  double total_duration() const noexcept { return segment_ends.empty() ? 0.0 : segment_ends.back(); }
};

}  // namespace safegen::sim
