#include "safegen/orchestrator.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"
#include "safegen/errors.hpp"
#include "safegen/sim/integration.hpp"
#include "safegen/static_validation.hpp"
#include "safegen/subprocess.hpp"
#include "util.hpp"

namespace safegen {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::Safe:
      return "Safe";
    case RunOutcome::BudgetExhausted:
      return "BudgetExhausted";
    case RunOutcome::IntegrationBudgetExhausted:
      return "IntegrationBudgetExhausted";
    case RunOutcome::ToolError:
      return "ToolError";
  }
  return "ToolError";
}

int exit_code(RunOutcome outcome) noexcept {
  switch (outcome) {
    case RunOutcome::Safe:
      return 0;
    case RunOutcome::BudgetExhausted:
    case RunOutcome::IntegrationBudgetExhausted:
      return 2;
    case RunOutcome::ToolError:
      return 1;
  }
  return 1;
}

std::string to_json(const RunReport& r, bool with_timing) {
  ordered_json doc;
  doc["outcome"] = to_string(r.outcome);
  doc["run_id"] = r.run_id;
  doc["final_state"] = {{"kind", to_string(r.final_state.kind)},
                        {"static_iterations", r.final_state.static_iterations},
                        {"integration_iterations", r.final_state.integration_iterations}};
  ordered_json counts;
  for (std::size_t i = 0; i < kStaticChecks.size(); ++i) {
    counts[std::string(to_string(kStaticChecks[i]))] = r.failure_counts[i];
  }
  doc["failure_counts"] = counts;
  doc["integration_failures"] = r.integration_failures;
  doc["total_candidates"] = r.total_candidates;
  if (with_timing) doc["wall_clock_ms"] = r.wall_clock.count();
  if (r.best_prior) {
    doc["best_prior"] = {{"candidate_id", r.best_prior->candidate_id},
                         {"passed_checks", r.best_prior->passed_checks},
                         {"content_hash", r.best_prior->content_hash}};
  } else {
    doc["best_prior"] = nullptr;
  }
  ordered_json trail = ordered_json::array();
  for (const auto& c : r.candidates) {
    trail.push_back({{"candidate_id", c.candidate_id},
                     {"strategy", to_string(c.strategy)},
                     {"stopped_at", c.stopped_at ? ordered_json(to_string(*c.stopped_at)) : nullptr},
                     {"state", to_string(c.state)},
                     {"feedback", c.feedback}});
  }
  doc["candidates"] = trail;
  doc["ledger"] = r.ledger.string();
  ordered_json tel = ordered_json::array();
  for (const auto& p : r.telemetry) tel.push_back(p.string());
  doc["telemetry"] = tel;
  if (!r.error.empty()) doc["error"] = r.error;
  return doc.dump(2) + "\n";
}

bool build_controller(const PipelineConfig& config, const fs::path& source, const fs::path& binary,
                      std::string* output) {
  TemplateVars vars;
  vars.scalars = {{"source", source.string()},
                  {"controller_main", config.controller_main.string()},
                  {"binary", binary.string()},
                  {"api_include", config.toolchain.api_include.string()}};
  RunOptions opts;
  opts.timeout = config.toolchain.tool_timeout;
  opts.output_cap = config.toolchain.output_cap;
  const auto r = run_command(expand_command(config.controller_build, vars), opts);
  if (!r.launched) throw ToolError("controller build: " + r.launch_error);
  if (r.timed_out) throw ToolError("controller build timed out");
  if (output) *output = r.output;
  return r.ok();
}

namespace {

void save_diagnostics(const fs::path& dir, std::uint64_t id, std::string_view check,
                      const std::string& raw) {
  if (raw.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  detail::write_text_file(dir / ("c" + std::to_string(id) + "-" + std::string(check) + ".log"), raw);
}

struct IntegrationStep {
  bool passed = false;
  std::string feedback;
};

IntegrationStep integrate(const PipelineConfig& config, const BehaviorSpec& behavior,
                          const Workspace& ws, std::uint64_t id, const fs::path& tel_dir,
                          const fs::path& diag_dir, RunReport& report) {
  const fs::path binary = ws.dir() / "controller";
  std::string build_output;
  if (!build_controller(config, ws.source(), binary, &build_output)) {
    save_diagnostics(diag_dir, id, "ControllerBuild", build_output);
    return {false, "the candidate could not be built into the controller wrapper; keep the "
                   "exact signature and types from the design"};
  }
  const auto endpoint = sim::ControllerEndpoint::process({binary.string()});
  try {
    const auto result =
        sim::run_integration_monitoring(endpoint, behavior, config.n_seeds, config.simulation);
    std::error_code ec;
    fs::create_directories(tel_dir, ec);
    for (std::size_t i = 0; i < result.telemetry.size(); ++i) {
      const std::string stem =
          "c" + std::to_string(id) + "-seed" + std::to_string(behavior.seed + i);
      sim::write_csv(tel_dir / (stem + ".csv"), result.telemetry[i]);
      detail::write_text_file(tel_dir / (stem + ".json"), sim::to_json(result.reports[i]));
      report.telemetry.push_back(tel_dir / (stem + ".csv"));
    }
    return {result.passed, result.feedback};
  } catch (const ControllerCrashed& e) {
    return {false, std::string("controller crashed during integration: ") + e.what()};
  } catch (const ProtocolViolation& e) {
    return {false, std::string("controller violated the wire protocol: ") + e.what()};
  } catch (const DeadlineExceeded& e) {
    return {false, std::string("controller missed the reply deadline: ") + e.what()};
  }
}

}  // namespace

RunReport run_full_pipeline(const PipelineConfig& config, GenerationBackend& backend) {
  const auto started = std::chrono::steady_clock::now();
  check_paths(config);
  const DesignSpec design = load_design_spec(config.design_spec.string());
  BehaviorSpec behavior = load_behavior_spec(config.behavior_spec.string());
  if (config.seed) behavior.seed = *config.seed;
  const TestSuiteManifest suite = load_test_manifest(config.test_manifest);
  const std::vector<FewShotExample> shots =
      config.shots_dir ? load_shots(*config.shots_dir) : std::vector<FewShotExample>{};
  const std::string spec_block = render_for_prompt(design, behavior);

  Ledger ledger = Ledger::open(config.ledger);
  RunReport report;
  report.run_id = ledger.begin_run();
  report.ledger = config.ledger;
  const fs::path tel_dir = config.telemetry_dir / report.run_id;
  const fs::path diag_dir = config.ledger.parent_path() / "diagnostics" / report.run_id;

  VersionState state;
  std::map<std::uint64_t, std::string> code_by_id;  // candidates that passed something
  std::optional<std::string> feedback;
  std::optional<std::uint64_t> previous;

  auto finish = [&](RunOutcome outcome) {
    report.outcome = outcome;
    report.final_state = state;
    if (const auto best = ledger.best_prior()) {
      report.best_prior = BestPriorSummary{best->candidate_id, best->passed_checks(), best->content_hash};
    }
    report.wall_clock = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return report;
  };

  for (std::size_t iteration = 1; iteration <= config.budgets.max_static_iterations; ++iteration) {
    const auto best = ledger.best_prior();
    const bool any_passed = best && best->passed_checks() > 0 && code_by_id.contains(best->candidate_id);
    PromptContext ctx;
    ctx.spec_block = spec_block;
    ctx.strategy = choose_strategy(iteration, any_passed, !shots.empty());
    if (ctx.strategy == PromptStrategy::FewShot) ctx.shots = shots;
    if (ctx.strategy == PromptStrategy::ChainOfThought) ctx.best_prior_solution = code_by_id[best->candidate_id];
    ctx.error_feedback = feedback;
    const Prompt prompt = build_prompt(ctx, config.budgets.prompt_chars);
    const std::string response = generate(backend, prompt.text);

    const std::uint64_t id = ledger.records().empty() ? 1 : ledger.records().back().candidate_id + 1;
    CandidateTrail trail;
    trail.candidate_id = id;
    trail.strategy = ctx.strategy;
    std::vector<CheckOutcome> outcomes;
    SourceArtifact artifact;
    std::string this_feedback;

    bool has_code = true;
    try {
      artifact = extract_code(response, design.language_target);
    } catch (const NoCodeFound&) {
      has_code = false;
      artifact = make_artifact(std::string(), "cpp");
      artifact.content_hash = content_hash(response);
      outcomes.push_back({CheckKind::Structure, false});
      this_feedback = "no fenced C++ code block was found in the response";
      trail.stopped_at = CheckKind::Structure;
    }

    if (has_code) {
      Workspace ws = Workspace::create(id, config.workspace_root);
      ws.keep(config.keep_workspaces);
      StaticPipelineResult sp;
      try {
        sp = run_static_pipeline(artifact, design, config.toolchain, suite, ws);
      } catch (const ToolError& e) {
        report.error = e.what();
        return finish(RunOutcome::ToolError);
      }
      for (const auto& r : sp.results) {
        outcomes.push_back({r.kind, r.status == CheckStatus::Pass});
        if (r.status != CheckStatus::Pass) save_diagnostics(diag_dir, id, to_string(r.kind), r.raw_diagnostics);
      }
      if (!sp.passed) {
        this_feedback = sp.error_analysis;
        trail.stopped_at = sp.results.back().kind;
      } else {
        IntegrationStep step;
        try {
          step = integrate(config, behavior, ws, id, tel_dir, diag_dir, report);
        } catch (const ToolError& e) {
          report.error = e.what();
          return finish(RunOutcome::ToolError);
        }
        outcomes.push_back({CheckKind::Integration, step.passed});
        if (!step.passed) {
          this_feedback = "integration monitoring failed:\n" + step.feedback;
          trail.stopped_at = CheckKind::Integration;
        }
      }
    }

    CandidateRecord probe;
    probe.check_outcomes = outcomes;
    for (const auto e : events_for(probe)) state = transition(state, e);
    ledger.record(artifact, state, outcomes,
                  this_feedback.empty() ? std::nullopt : std::optional<std::string>(this_feedback),
                  previous);
    previous = id;
    if (std::any_of(outcomes.begin(), outcomes.end(), [](const CheckOutcome& o) { return o.passed; })) {
      code_by_id[id] = artifact.code;
    }

    ++report.total_candidates;
    if (trail.stopped_at) {
      if (*trail.stopped_at == CheckKind::Integration) {
        ++report.integration_failures;
      } else {
        ++report.failure_counts[static_cast<std::size_t>(*trail.stopped_at)];
      }
    }
    trail.state = state.kind;
    trail.feedback = this_feedback;
    report.candidates.push_back(trail);
    feedback = this_feedback.empty() ? std::nullopt : std::optional<std::string>(this_feedback);

    if (state.kind == VersionStateKind::Safe) return finish(RunOutcome::Safe);
    if (state.integration_iterations >= config.budgets.max_integration_iterations) {
      return finish(RunOutcome::IntegrationBudgetExhausted);
    }
  }
  return finish(RunOutcome::BudgetExhausted);
}

RunReport run_full_pipeline(const PipelineConfig& config) {
  check_paths(config);
  auto backend = make_backend(config);
  return run_full_pipeline(config, *backend);
}

LedgerSummary summarize_ledger(std::span<const CandidateRecord> records) {
  LedgerSummary s;
  std::set<std::string> runs;
  std::set<std::string> safe;
  for (const auto& r : records) {
    runs.insert(r.run_id);
    ++s.candidates;
    if (r.state.kind == VersionStateKind::Safe) safe.insert(r.run_id);
    for (const auto& o : r.check_outcomes) {
      if (!o.passed) {
        ++s.failures[static_cast<std::size_t>(o.check)];
        break;
      }
    }
  }
  s.runs = runs.size();
  s.safe_runs = safe.size();
  s.mean_candidates_per_run = s.runs ? static_cast<double>(s.candidates) / static_cast<double>(s.runs) : 0.0;
  return s;
}

std::string to_json(const LedgerSummary& s) {
  ordered_json doc;
  doc["runs"] = s.runs;
  doc["safe_runs"] = s.safe_runs;
  doc["candidates"] = s.candidates;
  doc["mean_candidates_per_run"] = s.mean_candidates_per_run;
  ordered_json f;
  for (auto k : {CheckKind::Structure, CheckKind::Compile, CheckKind::StyleDesign, CheckKind::UnitTest,
                 CheckKind::Integration}) {
    f[std::string(to_string(k))] = s.failures[static_cast<std::size_t>(k)];
  }
  doc["failures"] = f;
  return doc.dump(2) + "\n";
}

std::string to_text(const LedgerSummary& s) {
  std::string out = detail::format("runs: %zu (safe: %zu)\ncandidates: %zu (%.2f per run)\n",
                                   s.runs, s.safe_runs, s.candidates, s.mean_candidates_per_run);
  out += "failures by check:\n";
  for (auto k : {CheckKind::Structure, CheckKind::Compile, CheckKind::StyleDesign, CheckKind::UnitTest,
                 CheckKind::Integration}) {
    out += detail::format("  %-12s %zu\n", std::string(to_string(k)).c_str(),
                          s.failures[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace safegen
