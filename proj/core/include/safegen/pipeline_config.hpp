#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safegen/backend.hpp"
#include "safegen/llm_handler.hpp"
#include "safegen/sim/integration.hpp"
#include "safegen/static_validation.hpp"

namespace safegen {

enum class BackendKind { Replay, Http };

struct Budgets {
  std::size_t max_static_iterations = 25;      // candidates per run
  std::size_t max_integration_iterations = 5;  // integration failures per run
  std::size_t prompt_chars = 32000;
};

/// Everything a run needs. Relative paths in the file resolve against the
/// directory holding it.
struct PipelineConfig {
  std::filesystem::path design_spec;
  std::filesystem::path behavior_spec;
  std::filesystem::path test_manifest;
  std::filesystem::path ledger = "safegen-out/ledger.jsonl";
  std::filesystem::path workspace_root = "safegen-out/work";
  std::filesystem::path telemetry_dir = "safegen-out/telemetry";
  std::optional<std::filesystem::path> shots_dir;
  std::filesystem::path controller_main;  // wraps the candidate in the protocol

  BackendKind backend = BackendKind::Replay;
  std::filesystem::path replay_dir;
  HttpBackendConfig http;

  Budgets budgets;
  std::size_t n_seeds = 3;
  std::optional<std::uint64_t> seed;  // overrides the behaviour spec seed
  bool keep_workspaces = false;

  ToolchainConfig toolchain;
  std::vector<std::string> controller_build = {"g++", "-std=c++17", "-O2", "-I{api_include}",
                                               "{source}", "{controller_main}", "-o", "{binary}"};
  sim::SimConfig simulation;
};

/// Parses and resolves a config document. Budgets must be >= 1. Throws
/// ConfigError (including schema problems).
PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir);

/// Loads `path`, or ./safegen.json when `path` is empty.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Checks that every input path exists. Throws ConfigError.
void check_paths(const PipelineConfig& config);

/// Few-shot pairs from `<name>.task.md` + `<name>.solution.cpp`, by name.
std::vector<FewShotExample> load_shots(const std::filesystem::path& dir);

std::unique_ptr<GenerationBackend> make_backend(const PipelineConfig& config);

}  // namespace safegen
