#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "safegen/sim/telemetry.hpp"
#include "safegen/spec_model.hpp"

namespace safegen::sim {

struct EvaluationOptions {
  /// Applies to every sample, emergency or not.
  double hard_accel_ceiling = SimConstants{}.b_max;
};

struct EvaluationReport {
  bool collision = false;
  bool clearance_ok = true;
  bool accel_ok = true;
  double band_occupancy = 0.0;
  bool band_ok = false;
  bool timing_ok = true;
  bool passed = false;

  std::vector<std::size_t> clearance_violations;  // sample indices
  std::vector<std::size_t> accel_violations;
  std::vector<std::size_t> timing_violations;

  std::optional<double> worst_clearance_margin;  // min(gap - required), post-settle
  double min_gap = 0.0;
  double peak_abs_accel = 0.0;                // all samples
  double peak_abs_accel_non_emergency = 0.0;  // samples the limit applies to
  double max_latency_ms = 0.0;
  std::size_t samples = 0;
  std::size_t post_settle_samples = 0;
  std::size_t emergency_samples = 0;
  /// Which samples the clearance rule covered.
  std::string clearance_window = "post_settle";

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Pure function of its inputs. Post-settle means t >= settle_time.
EvaluationReport evaluate_data(const Telemetry& telemetry, const BehaviorSpec& behavior,
                               const EvaluationOptions& options = {});

/// Sidecar JSON; index lists are written in full.
std::string to_json(const EvaluationReport& report);

}  // namespace safegen::sim
