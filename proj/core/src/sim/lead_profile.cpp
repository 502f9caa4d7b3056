#include "safegen/sim/lead_profile.hpp"

#include <algorithm>
#include <cmath>

namespace safegen::sim {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  std::uint64_t x = z;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Segment boundaries are compared with this slack so accumulated durations
// do not flip a tick into the neighbouring segment.
constexpr double kBoundaryEps = 1e-12;

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t z = seed;
  for (auto& s : s_) s = splitmix64(z);
}

std::uint64_t Xoshiro256::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

LeadProfile LeadProfile::generate(std::uint64_t seed, double episode_duration,
                                  const LeadProfileConfig& c) {
  LeadProfile p;
  p.seed = seed;
  Xoshiro256 rng(seed);
  const double lo = c.cruise_low;
  const double hi = c.cruise_high;
  double v = c.initial_speed;
  double total = 0.0;
  do {
    const double d = c.min_duration + (c.max_duration - c.min_duration) * rng.uniform();
    double a = (2.0 * rng.uniform() - 1.0) * c.spread;
    if (v > hi) {
      a = -std::max(std::abs(a), c.spread / 2.0);
    } else if (v < lo) {
      a = std::max(std::abs(a), c.spread / 2.0);
    } else if (v + a * d < lo || v + a * d > hi) {
      a = -a;
    }
    double end = v + a * d;
    if (v >= lo && v <= hi) {
      end = std::clamp(end, lo, hi);
    } else if (v > hi) {
      end = std::max(end, lo);
    } else {
      end = std::min(end, hi);
    }
    a = std::clamp((end - v) / d, -c.accel_clamp, c.accel_clamp);
    p.segments.push_back({d, a});
    total += d;
    p.segment_ends.push_back(total);
    v = std::clamp(v + a * d, 0.0, c.v_max);
  } while (total < episode_duration);
  return p;
}

double LeadProfile::acceleration_at(double t) const noexcept {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (t < segment_ends[i] - kBoundaryEps) return segments[i].acceleration;
  }
  return segments.empty() ? 0.0 : segments.back().acceleration;
}

}  // namespace safegen::sim
