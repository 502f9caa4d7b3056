#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safegen {

enum class LanguageTarget { Cpp };

std::string_view to_string(LanguageTarget target);

/// Closed interval of admissible values for a port.
struct ValueRange {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

/// One named input or output of the function under generation.
struct PortSpec {
  std::string name;
  std::string type;  // semantic type, e.g. "speed"
  std::string unit;  // physical unit, "1" for dimensionless
  ValueRange range;

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

/// Function contract handed to the generator: entry point, ports, and the
/// opaque pre/postcondition predicates.
struct DesignSpec {
  std::string function_name;
  LanguageTarget language_target = LanguageTarget::Cpp;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;
  std::vector<std::string> preconditions;
  std::vector<std::string> postconditions;
  std::vector<std::string> dependencies;
  std::vector<std::string> system_api;

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

/// Dynamic safety checks the integration monitor evaluates.
///
/// Every member initializer below is the documented default. Values the
/// ACC standard leaves open (clearance, time gap, settle window) are
/// configuration and can be overridden per document.
struct BehaviorSpec {
  double c_min = 2.0;              // m
  double tau_min = 1.5;            // s
  double nominal_distance = 10.0;  // m
  double band_low = 8.0;           // m
  double band_high = 12.0;         // m
  double a_limit = 5.0;            // m/s^2
  double settle_time = 20.0;       // s
  double band_occupancy_min = 0.9;
  double episode_duration = 120.0;        // s
  std::optional<double> tick_deadline_ms;  // nullopt: disabled
  std::uint64_t seed = 7;

  friend bool operator==(const BehaviorSpec&, const BehaviorSpec&) = default;
};

/// Parses a design specification. Unknown keys are rejected.
/// Throws SyntaxError, SchemaError (with a `$.field` path) or InvariantError.
DesignSpec parse_design_spec(std::string_view json_text);

/// Parses a behaviour specification; omitted keys keep their defaults.
BehaviorSpec parse_behavior_spec(std::string_view yaml_text);

void validate(const DesignSpec& design);
void validate(const BehaviorSpec& behavior);

/// Canonical JSON (sorted keys, two-space indent).
std::string render_design_json(const DesignSpec& design);

/// YAML in fixed field order with shortest round-trip number formatting.
std::string render_behavior_yaml(const BehaviorSpec& behavior);

/// The specification block embedded into every prompt.
std::string render_for_prompt(const DesignSpec& design,
                              const BehaviorSpec& behavior);

DesignSpec load_design_spec(const std::string& path);
BehaviorSpec load_behavior_spec(const std::string& path);

bool is_identifier(std::string_view text);

}  // namespace safegen
