#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace safegen {

struct TestCaseSpec {
  std::string name;  // "Suite.Case", as passed to --gtest_filter
  std::string category;
  std::vector<std::string> expected_literals;
};

/// User-supplied unit-test suite. Categories are the only vocabulary the
/// sanitized feedback may use.
struct TestSuiteManifest {
  std::vector<std::filesystem::path> sources;
  std::vector<TestCaseSpec> tests;
  std::vector<std::string> forbidden_substrings;

  /// Test names, expected literals and declared forbidden substrings.
  std::vector<std::string> all_forbidden() const;
  const TestCaseSpec* find(std::string_view name) const;
};

/// Parses the manifest JSON; relative sources resolve against `base_dir`.
/// Throws SchemaError, or ConfigError when a category would leak a
/// forbidden substring.
TestSuiteManifest parse_test_manifest(std::string_view json_text,
                                      const std::filesystem::path& base_dir);
TestSuiteManifest load_test_manifest(const std::filesystem::path& path);

struct TestOutcome {
  std::string name;  // "Suite.Case"
  bool passed = false;
  std::string failure_text;
};

/// Tests in a gtest --gtest_output=json report. Throws SyntaxError when the
/// document is not a gtest report.
std::vector<TestOutcome> parse_gtest_report(std::string_view json_text);

struct UnitTestVerdict {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::string feedback;  // empty iff failed == 0
};

/// Counts failures among the manifest's tests and renders feedback such as
/// "3/12 failed; categories: boundary×2, sign-convention×1". Falls back to
/// coarser wording whenever a rendering would contain a forbidden substring.
/// Tests absent from `outcomes` count as failed.
UnitTestVerdict summarize_unit_tests(const TestSuiteManifest& manifest,
                                     std::span<const TestOutcome> outcomes);

/// True iff `feedback` contains none of the manifest's forbidden substrings.
bool feedback_is_clean(std::string_view feedback, const TestSuiteManifest& manifest);

}  // namespace safegen
