#include "safegen/sim/evaluator.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace safegen::sim {

EvaluationReport evaluate_data(const Telemetry& tel, const BehaviorSpec& b,
                               const EvaluationOptions& options) {
  EvaluationReport r;
  r.samples = tel.samples.size();
  r.collision = tel.collided;
  r.min_gap = tel.samples.empty() ? 0.0 : tel.samples.front().gap;
  std::size_t in_band = 0;
  for (std::size_t i = 0; i < tel.samples.size(); ++i) {
    const Sample& s = tel.samples[i];
    r.min_gap = std::min(r.min_gap, s.gap);
    const double abs_a = std::abs(s.ego.acceleration);
    r.peak_abs_accel = std::max(r.peak_abs_accel, abs_a);
    if (s.command.emergency) {
      ++r.emergency_samples;
    } else {
      r.peak_abs_accel_non_emergency = std::max(r.peak_abs_accel_non_emergency, abs_a);
    }
    if ((!s.command.emergency && !(abs_a < b.a_limit)) || !(abs_a <= options.hard_accel_ceiling)) {
      r.accel_violations.push_back(i);
    }
    r.max_latency_ms = std::max(r.max_latency_ms, s.latency_ms);
    if (b.tick_deadline_ms && !(s.latency_ms <= *b.tick_deadline_ms)) r.timing_violations.push_back(i);

    if (s.t >= b.settle_time) {
      ++r.post_settle_samples;
      const double margin = s.gap - min_clearance(b.c_min, b.tau_min, s.ego.speed);
      r.worst_clearance_margin = r.worst_clearance_margin ? std::min(*r.worst_clearance_margin, margin)
                                                          : margin;
      if (!(margin >= 0.0)) r.clearance_violations.push_back(i);
      if (s.gap >= b.band_low && s.gap <= b.band_high) ++in_band;
    }
  }
  r.clearance_ok = r.clearance_violations.empty();
  r.accel_ok = r.accel_violations.empty();
  r.timing_ok = r.timing_violations.empty();
  r.band_occupancy = r.post_settle_samples == 0
                         ? 0.0
                         : static_cast<double>(in_band) / static_cast<double>(r.post_settle_samples);
  r.band_ok = r.band_occupancy >= b.band_occupancy_min;
  r.passed = !r.collision && r.clearance_ok && r.accel_ok && r.band_ok && r.timing_ok;
  return r;
}

std::string to_json(const EvaluationReport& r) {
  nlohmann::ordered_json doc;
  doc["passed"] = r.passed;
  doc["collision"] = r.collision;
  doc["clearance_ok"] = r.clearance_ok;
  doc["accel_ok"] = r.accel_ok;
  doc["band_occupancy"] = r.band_occupancy;
  doc["band_ok"] = r.band_ok;
  doc["timing_ok"] = r.timing_ok;
  doc["clearance_window"] = r.clearance_window;
  doc["worst_clearance_margin"] =
      r.worst_clearance_margin ? nlohmann::ordered_json(*r.worst_clearance_margin) : nullptr;
  doc["min_gap"] = r.min_gap;
  doc["peak_abs_accel"] = r.peak_abs_accel;
  doc["peak_abs_accel_non_emergency"] = r.peak_abs_accel_non_emergency;
  doc["max_latency_ms"] = r.max_latency_ms;
  doc["samples"] = r.samples;
  doc["post_settle_samples"] = r.post_settle_samples;
  doc["emergency_samples"] = r.emergency_samples;
  doc["clearance_violations"] = r.clearance_violations;
  doc["accel_violations"] = r.accel_violations;
  doc["timing_violations"] = r.timing_violations;
  return doc.dump(2) + "\n";
}

}  // namespace safegen::sim
