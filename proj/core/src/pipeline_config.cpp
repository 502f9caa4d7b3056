#include "safegen/pipeline_config.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, _] : obj_.items()) {
      if (!allowed.contains(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }
  }

  const json* find(const char* key) const {
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  template <typename T>
  void get(const char* key, T& out) const {
    const json* v = find(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void get_path(const char* key, fs::path& out, const fs::path& base) const {
    std::string s;
    get(key, s);
    if (const json* v = find(key); v && !s.empty()) out = resolve(s, base);
  }

  void get_ms(const char* key, std::chrono::milliseconds& out) const {
    long long ms = out.count();
    get(key, ms);
    if (ms <= 0) throw ConfigError(where(key) + ": must be positive");
    out = std::chrono::milliseconds(ms);
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    fs::path p(s);
    return p.is_absolute() || base.empty() ? p : base / p;
  }

 private:
  const json& obj_;
  std::string path_;
};

void read_toolchain(const json& j, ToolchainConfig& tc, std::vector<std::string>& controller_build,
                    const fs::path& base) {
  const Reader r(j, "$.toolchain",
                 {"compile", "lint", "test_compile", "test_link", "test_run", "controller_build",
                  "lint_rules", "rule_severity", "severity_threshold", "report_format",
                  "diagnostic_lines", "max_style_findings", "tool_timeout_ms", "test_timeout_ms",
                  "output_cap_bytes", "api_include"});
  r.get("compile", tc.compile);
  r.get("lint", tc.lint);
  r.get("test_compile", tc.test_compile);
  r.get("test_link", tc.test_link);
  r.get("test_run", tc.test_run);
  r.get("controller_build", controller_build);
  r.get("lint_rules", tc.lint_rules);
  if (const json* sev = r.find("rule_severity")) {
    if (!sev->is_object()) throw ConfigError("$.toolchain.rule_severity: expected an object");
    tc.rule_severity.clear();
    for (const auto& [rule, level] : sev->items()) {
      if (!level.is_string()) throw ConfigError("$.toolchain.rule_severity." + rule + ": expected a string");
      tc.rule_severity[rule] = parse_severity(level.get<std::string>());
    }
  }
  std::string threshold(to_string(tc.severity_threshold));
  r.get("severity_threshold", threshold);
  tc.severity_threshold = parse_severity(threshold);
  r.get("report_format", tc.report_format);
  if (tc.report_format != "gtest-json") {
    throw ConfigError("$.toolchain.report_format: only \"gtest-json\" is supported");
  }
  r.get("diagnostic_lines", tc.diagnostic_lines);
  r.get("max_style_findings", tc.max_style_findings);
  r.get_ms("tool_timeout_ms", tc.tool_timeout);
  r.get_ms("test_timeout_ms", tc.test_timeout);
  r.get("output_cap_bytes", tc.output_cap);
  r.get_path("api_include", tc.api_include, base);
  for (const auto* t : {&tc.compile, &tc.lint, &tc.test_compile, &tc.test_link, &tc.test_run,
                        &controller_build}) {
    if (t->empty()) throw ConfigError("$.toolchain: command templates must not be empty");
  }
}

void read_simulation(const json& j, sim::SimConfig& s) {
  const Reader r(j, "$.simulation",
                 {"dt", "a_max", "b_max", "v_max", "vehicle_length", "initial_speed",
                  "reply_timeout_ms", "measure_latency", "lead"});
  r.get("dt", s.constants.dt);
  r.get("a_max", s.constants.a_max);
  r.get("b_max", s.constants.b_max);
  r.get("v_max", s.constants.v_max);
  r.get("vehicle_length", s.constants.vehicle_length);
  r.get("initial_speed", s.initial_speed);
  r.get_ms("reply_timeout_ms", s.reply_timeout);
  r.get("measure_latency", s.measure_latency);
  if (const json* lead = r.find("lead")) {
    const Reader l(*lead, "$.simulation.lead",
                   {"cruise_low", "cruise_high", "spread", "min_duration", "max_duration",
                    "accel_clamp"});
    l.get("cruise_low", s.lead.cruise_low);
    l.get("cruise_high", s.lead.cruise_high);
    l.get("spread", s.lead.spread);
    l.get("min_duration", s.lead.min_duration);
    l.get("max_duration", s.lead.max_duration);
    l.get("accel_clamp", s.lead.accel_clamp);
  }
  if (!(s.constants.dt > 0.0) || !(s.constants.a_max > 0.0) || !(s.constants.b_max > 0.0) ||
      !(s.constants.v_max > 0.0) || !(s.constants.vehicle_length >= 0.0)) {
    throw ConfigError("$.simulation: constants must be positive");
  }
  if (!(s.lead.cruise_low <= s.lead.cruise_high) ||
      !(s.lead.min_duration > 0.0 && s.lead.min_duration <= s.lead.max_duration)) {
    throw ConfigError("$.simulation.lead: inconsistent envelope or durations");
  }
  s.evaluation.hard_accel_ceiling = s.constants.b_max;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text, const fs::path& base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  const Reader r(doc, "$",
                 {"design_spec", "behavior_spec", "test_manifest", "ledger", "workspace_root",
                  "telemetry_dir", "shots_dir", "controller_main", "backend", "budgets", "n_seeds",
                  "seed", "keep_workspaces", "toolchain", "simulation"});
  PipelineConfig c;
  c.ledger = Reader::resolve(c.ledger.string(), base);
  c.workspace_root = Reader::resolve(c.workspace_root.string(), base);
  c.telemetry_dir = Reader::resolve(c.telemetry_dir.string(), base);
  r.get_path("design_spec", c.design_spec, base);
  r.get_path("behavior_spec", c.behavior_spec, base);
  r.get_path("test_manifest", c.test_manifest, base);
  r.get_path("ledger", c.ledger, base);
  r.get_path("workspace_root", c.workspace_root, base);
  r.get_path("telemetry_dir", c.telemetry_dir, base);
  r.get_path("controller_main", c.controller_main, base);
  if (r.find("shots_dir")) {
    fs::path p;
    r.get_path("shots_dir", p, base);
    c.shots_dir = p;
  }
  for (const char* key : {"design_spec", "behavior_spec", "test_manifest", "controller_main"}) {
    if (!r.find(key)) throw ConfigError(r.where(key) + ": missing required key");
  }

  if (const json* b = r.find("backend")) {
    const Reader br(*b, "$.backend",
                    {"kind", "replay_dir", "endpoint", "path", "api_key_env", "model", "temperature",
                     "max_tokens", "timeout_ms", "retries", "backoff_ms"});
    std::string kind = "replay";
    br.get("kind", kind);
    if (kind == "replay") {
      c.backend = BackendKind::Replay;
    } else if (kind == "http") {
      c.backend = BackendKind::Http;
    } else {
      throw ConfigError("$.backend.kind: expected \"replay\" or \"http\"");
    }
    br.get_path("replay_dir", c.replay_dir, base);
    br.get("endpoint", c.http.endpoint);
    br.get("path", c.http.path);
    br.get("api_key_env", c.http.api_key_env);
    br.get("model", c.http.model);
    br.get("temperature", c.http.temperature);
    br.get("max_tokens", c.http.max_tokens);
    br.get_ms("timeout_ms", c.http.timeout);
    br.get("retries", c.http.retries);
    br.get_ms("backoff_ms", c.http.backoff);
    if (c.http.retries < 0) throw ConfigError("$.backend.retries: must be >= 0");
  }

  if (const json* b = r.find("budgets")) {
    const Reader br(*b, "$.budgets",
                    {"max_static_iterations", "max_integration_iterations", "prompt_chars"});
    br.get("max_static_iterations", c.budgets.max_static_iterations);
    br.get("max_integration_iterations", c.budgets.max_integration_iterations);
    br.get("prompt_chars", c.budgets.prompt_chars);
  }
  r.get("n_seeds", c.n_seeds);
  if (r.find("seed")) {
    std::uint64_t seed = 0;
    r.get("seed", seed);
    c.seed = seed;
  }
  r.get("keep_workspaces", c.keep_workspaces);
  c.toolchain.api_include = c.design_spec.empty() ? fs::path() : c.design_spec.parent_path() / "include";
  if (const json* t = r.find("toolchain")) read_toolchain(*t, c.toolchain, c.controller_build, base);
  if (const json* s = r.find("simulation")) read_simulation(*s, c.simulation);

  if (c.budgets.max_static_iterations < 1 || c.budgets.max_integration_iterations < 1 ||
      c.budgets.prompt_chars < 1 || c.n_seeds < 1) {
    throw ConfigError("$.budgets: every budget and n_seeds must be >= 1");
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const fs::path p = path.empty() ? fs::path("safegen.json") : path;
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError("config file " + p.string() + " not found");
  const fs::path base = fs::absolute(p, ec).parent_path();
  return parse_pipeline_config(detail::read_text_file(p), base);
}

void check_paths(const PipelineConfig& c) {
  auto need = [](const fs::path& p, const char* what) {
    std::error_code ec;
    if (p.empty() || !fs::exists(p, ec)) {
      throw ConfigError(std::string(what) + " not found: " + p.string());
    }
  };
  need(c.design_spec, "design spec");
  need(c.behavior_spec, "behaviour spec");
  need(c.test_manifest, "test manifest");
  need(c.controller_main, "controller wrapper");
  if (!c.toolchain.api_include.empty()) need(c.toolchain.api_include, "api include directory");
  if (c.shots_dir) need(*c.shots_dir, "shots directory");
  if (c.backend == BackendKind::Replay) need(c.replay_dir, "replay directory");
}

std::vector<FewShotExample> load_shots(const fs::path& dir) {
  std::vector<fs::path> tasks;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".task.md")) tasks.push_back(entry.path());
  }
  std::sort(tasks.begin(), tasks.end());
  std::vector<FewShotExample> out;
  for (const auto& task : tasks) {
    const std::string name = task.filename().string();
    const fs::path solution = dir / (name.substr(0, name.size() - 8) + ".solution.cpp");
    if (!fs::exists(solution)) throw ConfigError("few-shot task without solution: " + task.string());
    out.push_back({detail::read_text_file(task), detail::read_text_file(solution)});
  }
  return out;
}

std::unique_ptr<GenerationBackend> make_backend(const PipelineConfig& c) {
  if (c.backend == BackendKind::Http) return std::make_unique<HttpBackend>(c.http);
  return std::make_unique<ReplayBackend>(ReplayBackend::from_directory(c.replay_dir));
}

}  // namespace safegen
