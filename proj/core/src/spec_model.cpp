#include "safegen/spec_model.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

using nlohmann::json;

std::string_view to_string(LanguageTarget target) {
  switch (target) {
    case LanguageTarget::Cpp:
      return "cpp";
  }
  return "cpp";
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!head(text.front())) return false;
  for (char c : text) {
    if (!head(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

namespace {

// ---- design spec (JSON) ----------------------------------------------------

void require_keys(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || k == it.key();
    for (auto k : optional) known = known || k == it.key();
    if (!known) throw SchemaError(path + "." + it.key(), "unknown key");
  }
  for (auto k : required) {
    if (!obj.contains(std::string(k))) {
      throw SchemaError(path + "." + std::string(k), "missing required key");
    }
  }
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const std::string& key,
                  const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<std::string> get_string_list(const json& obj, const std::string& key,
                                         const std::string& path) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  const std::string here = path + "." + key;
  if (!v.is_array()) throw SchemaError(here, "expected an array of strings");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      throw SchemaError(here + "[" + std::to_string(i) + "]", "expected a string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

PortSpec parse_port(const json& obj, const std::string& path) {
  require_keys(obj, path, {"name", "type", "unit", "range"}, {});
  PortSpec port;
  port.name = get_string(obj, "name", path);
  port.type = get_string(obj, "type", path);
  port.unit = get_string(obj, "unit", path);
  const std::string range_path = path + ".range";
  require_keys(obj.at("range"), range_path, {"min", "max"}, {});
  port.range.min = get_number(obj.at("range"), "min", range_path);
  port.range.max = get_number(obj.at("range"), "max", range_path);
  return port;
}

std::vector<PortSpec> parse_ports(const json& obj, const std::string& key) {
  const std::string path = "$." + key;
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw SchemaError(path, "expected an array of ports");
  std::vector<PortSpec> ports;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    ports.push_back(parse_port(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return ports;
}

json port_to_json(const PortSpec& p) {
  return json{{"name", p.name},
              {"type", p.type},
              {"unit", p.unit},
              {"range", json{{"min", p.range.min}, {"max", p.range.max}}}};
}

// ---- behaviour spec (YAML) -------------------------------------------------

double yaml_number(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw SchemaError("$." + key, "expected a number");
  try {
    double v = node.as<double>();
    if (!std::isfinite(v)) throw SchemaError("$." + key, "expected a finite number");
    return v;
  } catch (const YAML::Exception&) {
    throw SchemaError("$." + key, "expected a number, got '" + node.Scalar() + "'");
  }
}

std::uint64_t yaml_unsigned(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw SchemaError("$." + key, "expected an unsigned integer");
  const std::string& text = node.Scalar();
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw SchemaError("$." + key, "expected an unsigned integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

void validate(const DesignSpec& design) {
  if (!is_identifier(design.function_name)) {
    throw InvariantError("function_name '" + design.function_name +
                         "' is not a valid identifier");
  }
  auto check_ports = [](const std::vector<PortSpec>& ports, const char* side) {
    std::set<std::string> seen;
    for (const auto& p : ports) {
      if (p.name.empty()) throw InvariantError(std::string(side) + " port with empty name");
      if (!seen.insert(p.name).second) {
        throw InvariantError(std::string(side) + " port '" + p.name + "' declared twice");
      }
      if (p.unit.empty()) throw InvariantError("port '" + p.name + "' has an empty unit");
      if (!(p.range.min <= p.range.max)) {
        throw InvariantError("port '" + p.name + "' has an empty range [" +
                             detail::shortest(p.range.min) + ", " +
                             detail::shortest(p.range.max) + "]");
      }
    }
  };
  check_ports(design.inputs, "input");
  check_ports(design.outputs, "output");
  for (const auto& in : design.inputs) {
    for (const auto& out : design.outputs) {
      if (in.name == out.name) {
        throw InvariantError("port '" + in.name + "' is both an input and an output");
      }
    }
  }
}

void validate(const BehaviorSpec& b) {
  if (!(b.c_min > 0)) throw InvariantError("c_min must be > 0");
  if (!(b.tau_min >= 0)) throw InvariantError("tau_min must be >= 0");
  if (!(b.a_limit > 0)) throw InvariantError("a_limit must be > 0");
  if (!(b.settle_time >= 0)) throw InvariantError("settle_time must be >= 0");
  if (!(b.episode_duration > b.settle_time)) {
    throw InvariantError("episode_duration must exceed settle_time");
  }
  if (!(b.band_low < b.nominal_distance && b.nominal_distance < b.band_high)) {
    throw InvariantError("band_low < nominal_distance < band_high violated");
  }
  if (!(b.band_occupancy_min >= 0 && b.band_occupancy_min <= 1)) {
    throw InvariantError("band_occupancy_min must lie in [0, 1]");
  }
  if (b.tick_deadline_ms && !(*b.tick_deadline_ms > 0)) {
    throw InvariantError("tick_deadline_ms must be > 0 or \"disabled\"");
  }
}

DesignSpec parse_design_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("design spec: ") + e.what());
  }
  require_keys(doc, "$", {"function_name", "inputs", "outputs"},
               {"language_target", "preconditions", "postconditions",
                "dependencies", "system_api"});
  DesignSpec spec;
  spec.function_name = get_string(doc, "function_name", "$");
  if (doc.contains("language_target")) {
    std::string tag = get_string(doc, "language_target", "$");
    if (tag != "cpp") {
      throw SchemaError("$.language_target", "unsupported language '" + tag + "'");
    }
  }
  spec.inputs = parse_ports(doc, "inputs");
  spec.outputs = parse_ports(doc, "outputs");
  spec.preconditions = get_string_list(doc, "preconditions", "$");
  spec.postconditions = get_string_list(doc, "postconditions", "$");
  spec.dependencies = get_string_list(doc, "dependencies", "$");
  spec.system_api = get_string_list(doc, "system_api", "$");
  validate(spec);
  return spec;
}

BehaviorSpec parse_behavior_spec(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw SyntaxError(std::string("behaviour spec: ") + e.what());
  }
  BehaviorSpec spec;
  if (doc.IsNull()) {
    validate(spec);
    return spec;
  }
  if (!doc.IsMap()) throw SchemaError("$", "expected a mapping");

  struct Field {
    const char* key;
    double BehaviorSpec::*member;
  };
  static constexpr Field kNumeric[] = {
      {"c_min", &BehaviorSpec::c_min},
      {"tau_min", &BehaviorSpec::tau_min},
      {"nominal_distance", &BehaviorSpec::nominal_distance},
      {"band_low", &BehaviorSpec::band_low},
      {"band_high", &BehaviorSpec::band_high},
      {"a_limit", &BehaviorSpec::a_limit},
      {"settle_time", &BehaviorSpec::settle_time},
      {"band_occupancy_min", &BehaviorSpec::band_occupancy_min},
      {"episode_duration", &BehaviorSpec::episode_duration},
  };

  std::unordered_set<std::string> seen;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = it->first.as<std::string>();
    if (!seen.insert(key).second) throw SchemaError("$." + key, "duplicate key");
    const YAML::Node& value = it->second;
    bool handled = false;
    for (const auto& f : kNumeric) {
      if (key == f.key) {
        spec.*f.member = yaml_number(value, key);
        handled = true;
        break;
      }
    }
    if (handled) continue;
    if (key == "seed") {
      spec.seed = yaml_unsigned(value, key);
    } else if (key == "tick_deadline_ms") {
      if (value.IsScalar() && value.Scalar() == "disabled") {
        spec.tick_deadline_ms.reset();
      } else {
        spec.tick_deadline_ms = yaml_number(value, key);
      }
    } else {
      throw SchemaError("$." + key, "unknown key");
    }
  }
  validate(spec);
  return spec;
}

std::string render_design_json(const DesignSpec& d) {
  json doc;
  doc["function_name"] = d.function_name;
  doc["language_target"] = std::string(to_string(d.language_target));
  doc["inputs"] = json::array();
  for (const auto& p : d.inputs) doc["inputs"].push_back(port_to_json(p));
  doc["outputs"] = json::array();
  for (const auto& p : d.outputs) doc["outputs"].push_back(port_to_json(p));
  doc["preconditions"] = d.preconditions;
  doc["postconditions"] = d.postconditions;
  doc["dependencies"] = d.dependencies;
  doc["system_api"] = d.system_api;
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  return doc.dump(2);
}

std::string render_behavior_yaml(const BehaviorSpec& b) {
  using detail::shortest;
  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) {
    out.append(key).append(": ").append(value).push_back('\n');
  };
  line("c_min", shortest(b.c_min));
  line("tau_min", shortest(b.tau_min));
  line("nominal_distance", shortest(b.nominal_distance));
  line("band_low", shortest(b.band_low));
  line("band_high", shortest(b.band_high));
  line("a_limit", shortest(b.a_limit));
  line("settle_time", shortest(b.settle_time));
  line("band_occupancy_min", shortest(b.band_occupancy_min));
  line("episode_duration", shortest(b.episode_duration));
  line("tick_deadline_ms",
       b.tick_deadline_ms ? shortest(*b.tick_deadline_ms) : std::string("disabled"));
  line("seed", std::to_string(b.seed));
  return out;
}

std::string render_for_prompt(const DesignSpec& design, const BehaviorSpec& behavior) {
  std::string out;
  out += "System design specification (JSON):\n```json\n";
  out += render_design_json(design);
  out += "\n```\n\nSystem behaviour specification (YAML):\n```yaml\n";
  out += render_behavior_yaml(behavior);
  out += "```\n";
  return out;
}

DesignSpec load_design_spec(const std::string& path) {
  return parse_design_spec(detail::read_text_file(path));
}

BehaviorSpec load_behavior_spec(const std::string& path) {
  return parse_behavior_spec(detail::read_text_file(path));
}

}  // namespace safegen
