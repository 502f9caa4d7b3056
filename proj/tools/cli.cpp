#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "safegen/errors.hpp"
#include "safegen/orchestrator.hpp"
#include "safegen/pipeline_config.hpp"
#include "safegen/sim/integration.hpp"
#include "safegen/sim/reference_controller.hpp"
#include "safegen/state_ledger.hpp"
#include "safegen/static_validation.hpp"

namespace safegen::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kBuiltinReference = "builtin:reference";

struct GlobalOptions {
  std::string config;
  std::string backend;
  std::optional<std::uint64_t> seed;
  bool keep_workspaces = false;
  std::optional<std::size_t> max_static;
  std::optional<std::size_t> max_integration;
  bool json = false;
};

/// Explicit --config, else ./safegen.json, else nothing (when optional).
std::optional<PipelineConfig> resolve_config(const GlobalOptions& g, bool required) {
  std::optional<PipelineConfig> config;
  if (!g.config.empty()) {
    config = load_pipeline_config(g.config);
  } else if (fs::exists("safegen.json")) {
    config = load_pipeline_config("safegen.json");
  } else if (required) {
    throw ConfigError("no --config given and ./safegen.json does not exist");
  }
  if (!config) return config;
  if (g.backend == "replay") config->backend = BackendKind::Replay;
  if (g.backend == "http") config->backend = BackendKind::Http;
  if (g.seed) config->seed = *g.seed;
  if (g.keep_workspaces) config->keep_workspaces = true;
  if (g.max_static) config->budgets.max_static_iterations = *g.max_static;
  if (g.max_integration) config->budgets.max_integration_iterations = *g.max_integration;
  if (config->budgets.max_static_iterations < 1 || config->budgets.max_integration_iterations < 1) {
    throw ConfigError("budgets must be >= 1");
  }
  return config;
}

int cmd_run(const GlobalOptions& g, std::ostream& out) {
  const auto config = resolve_config(g, true);
  const RunReport report = run_full_pipeline(*config);
  if (g.json) {
    out << to_json(report);
  } else {
    out << "run " << report.run_id << ": " << to_string(report.outcome) << " after "
        << report.total_candidates << " candidate(s)\n";
    out << "final state: " << to_string(report.final_state.kind)
        << " (I_S=" << report.final_state.static_iterations
        << ", I_I=" << report.final_state.integration_iterations << ")\n";
    out << "failures: Structure=" << report.failure_counts[0]
        << " Compile=" << report.failure_counts[1] << " StyleDesign=" << report.failure_counts[2]
        << " UnitTest=" << report.failure_counts[3]
        << " Integration=" << report.integration_failures << '\n';
    for (const auto& c : report.candidates) {
      out << "  #" << c.candidate_id << ' ' << to_string(c.strategy) << " -> "
          << (c.stopped_at ? std::string(to_string(*c.stopped_at)) + " failed" : std::string("passed"))
          << '\n';
    }
    if (!report.error.empty()) out << "error: " << report.error << '\n';
    out << "ledger: " << report.ledger.string() << '\n';
  }
  return exit_code(report.outcome);
}

int cmd_validate(const GlobalOptions& g, const std::string& file, std::ostream& out) {
  const auto config = resolve_config(g, true);
  const DesignSpec design = load_design_spec(config->design_spec.string());
  const TestSuiteManifest suite = load_test_manifest(config->test_manifest);
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file);
  std::string code((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const SourceArtifact artifact = make_artifact(std::move(code), "cpp");

  Workspace ws = Workspace::create(0, config->workspace_root);
  ws.keep(config->keep_workspaces);
  const auto result = run_static_pipeline(artifact, design, config->toolchain, suite, ws);
  if (g.json) {
    nlohmann::ordered_json doc;
    doc["passed"] = result.passed;
    doc["results"] = nlohmann::ordered_json::array();
    for (const auto& r : result.results) {
      doc["results"].push_back({{"check", to_string(r.kind)},
                                {"status", to_string(r.status)},
                                {"feedback", r.sanitized_feedback},
                                {"duration_ms", r.duration.count()}});
    }
    if (ws.kept()) doc["workspace"] = ws.dir().string();
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& r : result.results) {
      out << to_string(r.kind) << ": " << to_string(r.status) << '\n';
      if (!r.sanitized_feedback.empty()) out << r.sanitized_feedback << '\n';
    }
    out << (result.passed ? "Verified\n" : "not verified\n");
  }
  return result.passed ? kExitOk : kExitFail;
}

int cmd_simulate(const GlobalOptions& g, const std::vector<std::string>& controller,
                 const std::string& out_dir, std::optional<std::size_t> seeds,
                 const std::string& behavior_path, std::ostream& out) {
  if (controller.front() == kBuiltinReference && controller.size() > 1) {
    throw ConfigError("builtin:reference takes no arguments; put options before the controller");
  }
  const auto config = resolve_config(g, false);
  BehaviorSpec behavior;
  if (!behavior_path.empty()) {
    behavior = load_behavior_spec(behavior_path);
  } else if (config) {
    behavior = load_behavior_spec(config->behavior_spec.string());
  }
  if (config && config->seed) behavior.seed = *config->seed;
  if (g.seed) behavior.seed = *g.seed;
  const sim::SimConfig sim_config = config ? config->simulation : sim::SimConfig{};
  const std::size_t n = seeds.value_or(config ? config->n_seeds : 3);

  const sim::ControllerEndpoint endpoint =
      controller.front() == kBuiltinReference
          ? sim::reference_endpoint(behavior, sim_config.constants)
          : sim::ControllerEndpoint::process(controller);
  const auto result = sim::run_integration_monitoring(endpoint, behavior, n, sim_config);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  nlohmann::ordered_json doc;
  doc["passed"] = result.passed;
  doc["controller"] = endpoint.description;
  doc["episodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const std::uint64_t seed = behavior.seed + i;
    const fs::path csv = fs::path(out_dir) / ("episode-seed" + std::to_string(seed) + ".csv");
    const fs::path sidecar = fs::path(out_dir) / ("episode-seed" + std::to_string(seed) + ".json");
    sim::write_csv(csv, result.telemetry[i]);
    std::ofstream(sidecar) << sim::to_json(result.reports[i]);
    const auto& r = result.reports[i];
    doc["episodes"].push_back({{"seed", seed},
                               {"passed", r.passed},
                               {"telemetry", csv.string()},
                               {"report", sidecar.string()},
                               {"band_occupancy", r.band_occupancy},
                               {"min_gap", r.min_gap},
                               {"peak_abs_accel_non_emergency", r.peak_abs_accel_non_emergency}});
    if (!g.json) {
      char line[200];
      std::snprintf(line, sizeof line,
                    "seed %llu: %s  band %.3f  min gap %.2f m  peak |a| %.2f m/s^2  -> %s\n",
                    static_cast<unsigned long long>(seed), r.passed ? "PASS" : "FAIL",
                    r.band_occupancy, r.min_gap, r.peak_abs_accel_non_emergency,
                    csv.string().c_str());
      out << line;
    }
  }
  if (!result.passed) doc["feedback"] = result.feedback;
  if (g.json) {
    out << doc.dump(2) << '\n';
  } else if (!result.passed) {
    out << result.feedback << '\n';
  }
  return result.passed ? kExitOk : kExitFail;
}

int cmd_report(const GlobalOptions& g, const std::string& ledger, std::ostream& out) {
  const auto records = Ledger::load(ledger);
  const auto summary = summarize_ledger(records);
  out << (g.json ? to_json(summary) : to_text(summary));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"safegen: specification-driven generation and verification of ACC controllers"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "pipeline config JSON (default ./safegen.json)");
  app.add_option("--backend", g.backend, "generation backend")->check(CLI::IsMember({"replay", "http"}));
  app.add_option("--seed", g.seed, "base simulation seed");
  app.add_flag("--keep-workspaces", g.keep_workspaces, "keep candidate workspaces on disk");
  app.add_option("--max-static-iters", g.max_static, "candidate budget I_S_max")->check(CLI::PositiveNumber);
  app.add_option("--max-integration-iters", g.max_integration, "integration budget I_I_max")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json", g.json, "machine-readable output");

  auto* run_cmd = app.add_subcommand("run", "full generate/validate/integrate loop");

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "static pipeline on one source file");
  validate_cmd->add_option("file", validate_file, "C++ source")->required();

  std::vector<std::string> controller;
  std::string sim_out = "safegen-sim";
  std::optional<std::size_t> sim_seeds;
  std::string sim_behavior;
  auto* simulate_cmd = app.add_subcommand("simulate", "integration monitoring of one controller");
  simulate_cmd->add_option("controller", controller,
                           "controller command line, or builtin:reference")
      ->required();
  simulate_cmd->add_option("--out", sim_out, "directory for telemetry CSV and reports");
  simulate_cmd->add_option("--seeds", sim_seeds, "number of episodes")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--behavior", sim_behavior, "behaviour spec YAML");
  simulate_cmd->positionals_at_end();

  std::string ledger_path;
  auto* report_cmd = app.add_subcommand("report", "per-check statistics from a ledger");
  report_cmd->add_option("ledger", ledger_path, "ledger JSONL file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(g, out);
    if (validate_cmd->parsed()) return cmd_validate(g, validate_file, out);
    if (simulate_cmd->parsed()) return cmd_simulate(g, controller, sim_out, sim_seeds, sim_behavior, out);
    if (report_cmd->parsed()) return cmd_report(g, ledger_path, out);
  } catch (const ToolError& e) {
    err << "tool error: " << e.what() << '\n';
    return kExitToolError;
  } catch (const ControllerCrashed& e) {
    err << "controller crashed: " << e.what() << '\n';
    return kExitFail;
  } catch (const ProtocolViolation& e) {
    err << "protocol violation: " << e.what() << '\n';
    return kExitFail;
  } catch (const DeadlineExceeded& e) {
    err << "deadline exceeded: " << e.what() << '\n';
    return kExitFail;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitToolError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace safegen::cli
