#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "safegen/check_kind.hpp"
#include "safegen/llm_handler.hpp"
#include "safegen/spec_model.hpp"
#include "safegen/unit_test_report.hpp"

namespace safegen {

enum class CheckStatus { Pass, Fail, ToolError };

std::string_view to_string(CheckStatus status);

struct CheckResult {
  CheckKind kind = CheckKind::Structure;
  CheckStatus status = CheckStatus::Pass;
  std::string raw_diagnostics;     // full tool output, ledger only
  std::string sanitized_feedback;  // what the next prompt may see
  std::chrono::milliseconds duration{0};
};

enum class Severity { Note = 0, Warning = 1, Error = 2 };

/// "note" | "warning" | "error"; throws ConfigError otherwise.
Severity parse_severity(std::string_view text);
std::string_view to_string(Severity severity);

/// Command templates are argv vectors with `{placeholder}` arguments.
struct ToolchainConfig {
  std::vector<std::string> compile = {"g++", "-std=c++17", "-Wall", "-Wextra", "-Werror",
                                      "-I{api_include}", "-c", "{source}", "-o", "{object}"};
  std::vector<std::string> lint = {"clang-tidy", "{source}", "--quiet", "--checks=-*,{rules}",
                                   "--export-fixes={report}", "--", "-std=c++17",
                                   "-Wunused-variable", "-I{api_include}"};
  std::vector<std::string> test_compile = {"g++", "-std=c++17", "-I{api_include}", "-c",
                                           "{test_source}", "-o", "{test_object}"};
  std::vector<std::string> test_link = {"g++", "{object}", "{test_objects}", "-o", "{binary}",
                                        "-lgtest", "-lgtest_main", "-pthread"};
  std::vector<std::string> test_run = {"{binary}", "--gtest_filter={test}",
                                       "--gtest_output=json:{report}"};

  /// Enabled analyzer rules, joined with ',' into {rules}.
  std::vector<std::string> lint_rules = {"bugprone-narrowing-conversions",
                                         "clang-diagnostic-unused-variable"};
  /// Per-rule severity; a trailing '*' matches a prefix. Unlisted rules take
  /// the level the analyzer reported.
  std::map<std::string, Severity> rule_severity;
  Severity severity_threshold = Severity::Warning;

  std::filesystem::path api_include;
  std::string report_format = "gtest-json";
  std::size_t diagnostic_lines = 40;
  std::size_t max_style_findings = 20;
  std::chrono::milliseconds tool_timeout{60000};
  std::chrono::milliseconds test_timeout{5000};
  std::size_t output_cap = 1 << 20;
};

/// Fresh temp directory per candidate, removed on destruction unless kept.
class Workspace {
 public:
  /// Directory name embeds the candidate id and a random suffix.
  static Workspace create(std::uint64_t candidate_id,
                          const std::filesystem::path& root = std::filesystem::temp_directory_path());
  ~Workspace();

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  Workspace(Workspace&& other) noexcept;
  Workspace& operator=(Workspace&&) = delete;

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path source() const { return dir_ / "candidate.cpp"; }
  std::filesystem::path object() const { return dir_ / "candidate.o"; }

  void write_source(std::string_view code) const;
  void keep(bool value) noexcept { keep_ = value; }
  bool kept() const noexcept { return keep_; }

 private:
  explicit Workspace(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::filesystem::path dir_;
  bool keep_ = false;
};

/// Pure: Pass iff `design.function_name` is defined at file scope with one
/// parameter per design input and every dependency is permitted.
CheckResult check_structure(const SourceArtifact& artifact, const DesignSpec& design);

/// Expects the source already written to the workspace.
CheckResult check_compile(const Workspace& ws, const ToolchainConfig& tc);
CheckResult check_style(const Workspace& ws, const ToolchainConfig& tc);
CheckResult check_unit_tests(const Workspace& ws, const ToolchainConfig& tc,
                             const TestSuiteManifest& suite);

/// Strips directory components from absolute paths and keeps the first
/// `max_lines` lines.
std::string sanitize_compiler_output(std::string_view output, std::size_t max_lines);

struct StyleFinding {
  std::string rule;
  std::string message;
  std::size_t line = 0;
  Severity severity = Severity::Warning;
};

/// Parses a clang-tidy --export-fixes YAML document. `source_text` maps
/// byte offsets to lines. Throws SyntaxError on malformed input.
std::vector<StyleFinding> parse_style_report(std::string_view yaml_text,
                                             std::string_view source_text,
                                             const ToolchainConfig& tc);

struct StaticPipelineResult {
  std::vector<CheckResult> results;  // prefix of the check order
  bool passed = false;
  std::string error_analysis;  // feedback of the failing check
};

/// Runs the checks in order and stops at the first Fail. Throws ToolError
/// when a tool misbehaves; no partial result is returned in that case.
StaticPipelineResult run_static_pipeline(const SourceArtifact& artifact, const DesignSpec& design,
                                         const ToolchainConfig& tc, const TestSuiteManifest& suite,
                                         const Workspace& ws);

}  // namespace safegen
