#include "safegen/static_validation.hpp"

#include <gtest/gtest.h>

#include "safegen/errors.hpp"
#include "test_support.hpp"

namespace safegen {
namespace {

DesignSpec acc_design() { return load_design_spec((testing::acc_dir() / "design.json").string()); }

TestSuiteManifest acc_suite() {
  return load_test_manifest(testing::acc_dir() / "unit_tests" / "manifest.json");
}

ToolchainConfig acc_toolchain() {
  ToolchainConfig tc;
  tc.api_include = testing::acc_dir() / "include";
  return tc;
}

class StaticValidation : public ::testing::Test {
 protected:
  testing::TempDir root;
  Workspace make(const std::string& code) {
    Workspace ws = Workspace::create(1, root.path());
    ws.write_source(code);
    return ws;
  }
};

TEST(Structure, CleanCandidatePasses) {
  const auto r = check_structure(make_artifact(testing::candidate("clean"), "cpp"), acc_design());
  EXPECT_EQ(r.status, CheckStatus::Pass) << r.sanitized_feedback;
  EXPECT_EQ(r.kind, CheckKind::Structure);
}

TEST(Structure, WrongNameFails) {
  const auto r = check_structure(make_artifact(testing::candidate("structure_broken"), "cpp"), acc_design());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("missing file-scope definition of 'computeAccCommand'"),
            std::string::npos);
  EXPECT_NE(r.sanitized_feedback.find("computeAccelerationCommand"), std::string::npos);
}

TEST(Structure, ThreeOfFourParametersFails) {
  const std::string code =
      "#include \"acc_api.h\"\n"
      "AccCommand computeAccCommand(double ego_speed, double gap, double relative_speed) {\n"
      "  return AccCommand{0.0, 0.0, false};\n"
      "}\n";
  const auto r = check_structure(make_artifact(code, "cpp"), acc_design());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("takes 3 parameter(s), expected 4"), std::string::npos);
  EXPECT_NE(r.sanitized_feedback.find("line 2"), std::string::npos);
}

TEST(Structure, ForbiddenDependencyFails) {
  std::string code = testing::candidate("clean");
  code = "#include <curl/curl.h>\n" + code;
  const auto r = check_structure(make_artifact(code, "cpp"), acc_design());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("curl/curl.h"), std::string::npos);
}

TEST_F(StaticValidation, CompilePasses) {
  const auto ws = make(testing::candidate("clean"));
  const auto r = check_compile(ws, acc_toolchain());
  EXPECT_EQ(r.status, CheckStatus::Pass) << r.raw_diagnostics;
  EXPECT_TRUE(std::filesystem::exists(ws.object()));
}

TEST_F(StaticValidation, UndeclaredIdentifierFailsWithSanitizedPaths) {
  const auto ws = make(testing::candidate("non_compiling"));
  const auto r = check_compile(ws, acc_toolchain());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("'kNominalGap' was not declared"), std::string::npos);
  EXPECT_NE(r.sanitized_feedback.find("candidate.cpp"), std::string::npos);
  EXPECT_EQ(r.sanitized_feedback.find(root.path().string()), std::string::npos);
  EXPECT_NE(r.raw_diagnostics.find(root.path().string()), std::string::npos);
}

TEST_F(StaticValidation, MissingCompilerIsToolError) {
  const auto ws = make(testing::candidate("clean"));
  auto tc = acc_toolchain();
  tc.compile[0] = "/nonexistent/bin/g++";
  const auto r = check_compile(ws, tc);
  EXPECT_EQ(r.status, CheckStatus::ToolError);
}

TEST_F(StaticValidation, StyleCleanPasses) {
  const auto ws = make(testing::candidate("clean"));
  const auto r = check_style(ws, acc_toolchain());
  EXPECT_EQ(r.status, CheckStatus::Pass) << r.raw_diagnostics;
}

TEST_F(StaticValidation, NarrowingIsReportedWithLine) {
  const auto ws = make(testing::candidate("lint_dirty"));
  const auto r = check_style(ws, acc_toolchain());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("[bugprone-narrowing-conversions]"), std::string::npos);
  EXPECT_EQ(r.sanitized_feedback.rfind("line ", 0), 0u);
}

const char* kUnusedVariable =
    "#include \"acc_api.h\"\n"
    "AccCommand computeAccCommand(double ego_speed, double ego_accel, double gap, double relative_speed) {\n"
    "  static_cast<void>(ego_speed);\n"
    "  static_cast<void>(ego_accel);\n"
    "  static_cast<void>(relative_speed);\n"
    "  double unused = gap;\n"
    "  return AccCommand{0.0, 0.0, false};\n"
    "}\n";

TEST_F(StaticValidation, UnusedVariableRule) {
  const auto ws = make(kUnusedVariable);
  const auto r = check_style(ws, acc_toolchain());
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_NE(r.sanitized_feedback.find("line 6: [clang-diagnostic-unused-variable]"), std::string::npos)
      << r.sanitized_feedback;
}

TEST_F(StaticValidation, RuleMappedToNoteIsBelowThreshold) {
  const auto ws = make(kUnusedVariable);
  auto tc = acc_toolchain();
  tc.rule_severity["clang-diagnostic-*"] = Severity::Note;
  const auto r = check_style(ws, tc);
  EXPECT_EQ(r.status, CheckStatus::Pass) << r.sanitized_feedback;
}

TEST_F(StaticValidation, MalformedStyleReportIsToolError) {
  const auto ws = make(testing::candidate("clean"));
  auto tc = acc_toolchain();
  tc.lint = {"sh", "-c", "printf 'Diagnostics: [unclosed' > {report}"};
  EXPECT_EQ(check_style(ws, tc).status, CheckStatus::ToolError);
}

TEST_F(StaticValidation, AnalyzerCrashWithoutReportIsToolError) {
  const auto ws = make(testing::candidate("clean"));
  auto tc = acc_toolchain();
  tc.lint = {"sh", "-c", "exit 3"};
  EXPECT_EQ(check_style(ws, tc).status, CheckStatus::ToolError);
  tc.lint = {"/nonexistent/clang-tidy"};
  EXPECT_EQ(check_style(ws, tc).status, CheckStatus::ToolError);
}

TEST(StyleReport, ParsesExportFixesDocument) {
  const std::string source = "int a;\nint b;\nint c;\n";
  const std::string yaml =
      "---\n"
      "MainSourceFile: '/w/candidate.cpp'\n"
      "Diagnostics:\n"
      "  - DiagnosticName: bugprone-narrowing-conversions\n"
      "    DiagnosticMessage:\n"
      "      Message: 'narrowing conversion'\n"
      "      FilePath: '/w/candidate.cpp'\n"
      "      FileOffset: 9\n"
      "      Replacements: []\n"
      "    Level: Warning\n"
      "...\n";
  const auto findings = parse_style_report(yaml, source, ToolchainConfig{});
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].line, 2u);
  EXPECT_EQ(findings[0].severity, Severity::Warning);
  EXPECT_THROW(parse_style_report("Diagnostics: [", source, ToolchainConfig{}), SyntaxError);
  EXPECT_THROW(parse_style_report("Other: 1\n", source, ToolchainConfig{}), SyntaxError);
}

TEST(Severity, Parsing) {
  EXPECT_EQ(parse_severity("note"), Severity::Note);
  EXPECT_EQ(parse_severity("Warning"), Severity::Warning);
  EXPECT_EQ(parse_severity("error"), Severity::Error);
  EXPECT_THROW(parse_severity("fatal-ish"), ConfigError);
}

TEST(Sanitize, StripsDirectoriesAndLimitsLines) {
  const std::string raw =
      "/tmp/safegen-c1-abc/candidate.cpp:3:5: error: 'x' was not declared\n"
      "In file included from '/usr/include/c++/11/cmath':\n"
      "third\nfourth\n";
  const auto s = sanitize_compiler_output(raw, 3);
  EXPECT_EQ(s, "candidate.cpp:3:5: error: 'x' was not declared\n"
               "In file included from 'cmath':\n"
               "third");
}

TEST_F(StaticValidation, UnitTestsPassForClean) {
  const auto ws = make(testing::candidate("clean"));
  ASSERT_EQ(check_compile(ws, acc_toolchain()).status, CheckStatus::Pass);
  const auto r = check_unit_tests(ws, acc_toolchain(), acc_suite());
  EXPECT_EQ(r.status, CheckStatus::Pass) << r.sanitized_feedback;
}

TEST_F(StaticValidation, UnitTestFailureFeedbackIsSanitized) {
  const auto ws = make(testing::candidate("test_failing"));
  ASSERT_EQ(check_compile(ws, acc_toolchain()).status, CheckStatus::Pass);
  const auto suite = acc_suite();
  const auto r = check_unit_tests(ws, acc_toolchain(), suite);
  EXPECT_EQ(r.status, CheckStatus::Fail);
  EXPECT_EQ(r.sanitized_feedback, "4/12 failed; categories: boundary×1, range×2, sign-convention×1");
  EXPECT_TRUE(feedback_is_clean(r.sanitized_feedback, suite));
  EXPECT_NE(r.raw_diagnostics.find("AccSuite"), std::string::npos);
}

TEST_F(StaticValidation, HangingCandidateIsTimeoutToolError) {
  const std::string code =
      "#include \"acc_api.h\"\n"
      "AccCommand computeAccCommand(double ego_speed, double ego_accel, double gap, double relative_speed) {\n"
      "  volatile bool spin = true;\n"
      "  while (spin) {\n"
      "  }\n"
      "  return AccCommand{ego_speed, ego_accel + gap + relative_speed, false};\n"
      "}\n";
  const auto ws = make(code);
  auto tc = acc_toolchain();
  tc.test_timeout = std::chrono::milliseconds(300);
  ASSERT_EQ(check_compile(ws, tc).status, CheckStatus::Pass);
  const auto r = check_unit_tests(ws, tc, acc_suite());
  EXPECT_EQ(r.status, CheckStatus::ToolError);
  EXPECT_EQ(r.sanitized_feedback.rfind("timeout; category: ", 0), 0u);
}

TEST_F(StaticValidation, UnsupportedReportFormatIsToolError) {
  const auto ws = make(testing::candidate("clean"));
  auto tc = acc_toolchain();
  tc.report_format = "junit-xml";
  EXPECT_EQ(check_unit_tests(ws, tc, acc_suite()).status, CheckStatus::ToolError);
}

TEST_F(StaticValidation, PipelineStopsAtFirstFailure) {
  const auto design = acc_design();
  const auto suite = acc_suite();
  const auto tc = acc_toolchain();
  struct Case {
    const char* fixture;
    std::size_t results;
    bool passed;
  };
  for (const Case c : {Case{"structure_broken", 1, false}, Case{"non_compiling", 2, false},
                       Case{"lint_dirty", 3, false}, Case{"test_failing", 4, false},
                       Case{"clean", 4, true}}) {
    Workspace ws = Workspace::create(7, root.path());
    const auto out = run_static_pipeline(make_artifact(testing::candidate(c.fixture), "cpp"), design,
                                         tc, suite, ws);
    EXPECT_EQ(out.results.size(), c.results) << c.fixture;
    EXPECT_EQ(out.passed, c.passed) << c.fixture;
    for (std::size_t i = 0; i < out.results.size(); ++i) {
      EXPECT_EQ(out.results[i].kind, kStaticChecks[i]);
      const bool last = i + 1 == out.results.size();
      EXPECT_EQ(out.results[i].status, (last && !c.passed) ? CheckStatus::Fail : CheckStatus::Pass)
          << c.fixture << " check " << i;
    }
    EXPECT_EQ(out.error_analysis.empty(), c.passed);
  }
}

TEST_F(StaticValidation, PipelineToolFaultThrows) {
  Workspace ws = Workspace::create(2, root.path());
  auto tc = acc_toolchain();
  tc.compile[0] = "/nonexistent/bin/g++";
  EXPECT_THROW(run_static_pipeline(make_artifact(testing::candidate("clean"), "cpp"), acc_design(), tc,
                                   acc_suite(), ws),
               ToolError);
}

TEST(Workspace, RemovedUnlessKept) {
  testing::TempDir root;
  std::filesystem::path gone;
  std::filesystem::path kept;
  {
    Workspace a = Workspace::create(3, root.path());
    Workspace b = Workspace::create(3, root.path());
    EXPECT_NE(a.dir(), b.dir());
    EXPECT_NE(a.dir().filename().string().find("safegen-c3-"), std::string::npos);
    b.keep(true);
    gone = a.dir();
    kept = b.dir();
  }
  EXPECT_FALSE(std::filesystem::exists(gone));
  EXPECT_TRUE(std::filesystem::exists(kept));
}

}  // namespace
}  // namespace safegen
