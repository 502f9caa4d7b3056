#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "safegen/backend.hpp"
#include "safegen/check_kind.hpp"
#include "safegen/llm_handler.hpp"
#include "safegen/pipeline_config.hpp"
#include "safegen/state_ledger.hpp"

namespace safegen {

enum class RunOutcome { Safe, BudgetExhausted, IntegrationBudgetExhausted, ToolError };

std::string_view to_string(RunOutcome outcome);

struct CandidateTrail {
  std::uint64_t candidate_id = 0;
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::optional<CheckKind> stopped_at;  // first failing check, Integration included
  VersionStateKind state = VersionStateKind::Draft;
  std::string feedback;                 // what the next prompt received
};

struct BestPriorSummary {
  std::uint64_t candidate_id = 0;
  std::size_t passed_checks = 0;
  std::string content_hash;
};

struct RunReport {
  RunOutcome outcome = RunOutcome::BudgetExhausted;
  std::string run_id;
  VersionState final_state;
  /// Failures attributed to the check that stopped each candidate, in
  /// Structure, Compile, StyleDesign, UnitTest order.
  std::array<std::size_t, 4> failure_counts{};
  std::size_t integration_failures = 0;
  std::size_t total_candidates = 0;
  std::chrono::milliseconds wall_clock{0};
  std::optional<BestPriorSummary> best_prior;
  std::vector<CandidateTrail> candidates;
  std::filesystem::path ledger;
  std::vector<std::filesystem::path> telemetry;
  std::string error;  // set for ToolError
};

/// 0 for Safe, 2 for an exhausted budget, 1 for a tool fault.
int exit_code(RunOutcome outcome) noexcept;

/// Machine-readable report. The wall clock is omitted when `with_timing` is
/// false so repeated replay runs compare equal.
std::string to_json(const RunReport& report, bool with_timing = true);

/// Generate, statically validate and integrate candidates until one is Safe
/// or a budget runs out. Tool faults end the run with outcome ToolError.
/// Throws ConfigError, StorageError and backend errors.
RunReport run_full_pipeline(const PipelineConfig& config, GenerationBackend& backend);
RunReport run_full_pipeline(const PipelineConfig& config);

/// Builds the protocol wrapper around a candidate source. Throws ToolError
/// when the compiler cannot run; returns false when the build fails.
bool build_controller(const PipelineConfig& config, const std::filesystem::path& source,
                      const std::filesystem::path& binary, std::string* output = nullptr);

/// Per-check failure counts across all runs in a ledger.
struct LedgerSummary {
  std::size_t runs = 0;
  std::size_t candidates = 0;
  std::size_t safe_runs = 0;
  std::array<std::size_t, 5> failures{};  // indexed by CheckKind
  double mean_candidates_per_run = 0.0;
};

LedgerSummary summarize_ledger(std::span<const CandidateRecord> records);
std::string to_json(const LedgerSummary& summary);
std::string to_text(const LedgerSummary& summary);

}  // namespace safegen
