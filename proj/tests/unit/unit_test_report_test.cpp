#include "safegen/unit_test_report.hpp"

#include <gtest/gtest.h>

#include "safegen/errors.hpp"
#include "test_support.hpp"

namespace safegen {
namespace {

const char* kManifest = R"({
  "sources": ["suite.cpp"],
  "tests": [
    {"name": "S.A", "category": "boundary", "expected_literals": ["3.5"]},
    {"name": "S.B", "category": "range"},
    {"name": "S.C", "category": "range", "expected_literals": ["42"]},
    {"name": "S.D", "category": "sign-convention"}
  ],
  "forbidden_substrings": ["EXPECT_"]
})";

TestSuiteManifest manifest() { return parse_test_manifest(kManifest, "/base"); }

std::vector<TestOutcome> outcomes(std::initializer_list<std::pair<const char*, bool>> list) {
  std::vector<TestOutcome> out;
  for (const auto& [name, passed] : list) out.push_back({name, passed, passed ? "" : "boom"});
  return out;
}

TEST(TestManifest, ParsesAndResolvesSources) {
  const auto m = manifest();
  ASSERT_EQ(m.sources.size(), 1u);
  EXPECT_EQ(m.sources[0], std::filesystem::path("/base/suite.cpp"));
  ASSERT_EQ(m.tests.size(), 4u);
  EXPECT_EQ(m.find("S.C")->category, "range");
  EXPECT_EQ(m.find("S.Z"), nullptr);
  const auto f = m.all_forbidden();
  EXPECT_NE(std::find(f.begin(), f.end(), "S.A"), f.end());
  EXPECT_NE(std::find(f.begin(), f.end(), "42"), f.end());
  EXPECT_NE(std::find(f.begin(), f.end(), "EXPECT_"), f.end());
}

TEST(TestManifest, SchemaErrors) {
  auto path_of = [](const std::string& text) {
    try {
      parse_test_manifest(text, "/");
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(path_of(R"({"sources": ["a"], "tests": [], "extra": 1})"), "$.extra");
  EXPECT_EQ(path_of(R"({"tests": [{"name": "A.B", "category": "c"}]})"), "$.sources");
  EXPECT_EQ(path_of(R"({"sources": ["a"], "tests": [{"name": "A.B"}]})"), "$.tests[0].category");
  EXPECT_EQ(path_of(R"({"sources": ["a"], "tests": [{"name": "A.B", "category": "c"},
                                                    {"name": "A.B", "category": "c"}]})"),
            "$.tests[1].name");
  EXPECT_THROW(parse_test_manifest("{", "/"), SyntaxError);
}

TEST(TestManifest, LeakyCategoryIsConfigError) {
  EXPECT_THROW(parse_test_manifest(
                   R"({"sources": ["a"], "tests": [{"name": "A.B", "category": "see A.B"}]})", "/"),
               ConfigError);
}

TEST(TestManifest, ShippedAccSuiteLoads) {
  const auto m = load_test_manifest(testing::acc_dir() / "unit_tests" / "manifest.json");
  EXPECT_EQ(m.tests.size(), 12u);
  EXPECT_TRUE(std::filesystem::exists(m.sources.at(0)));
}

TEST(GtestReport, ParsesOutcomes) {
  const char* report = R"({
    "tests": 3, "failures": 1,
    "testsuites": [{
      "name": "S", "tests": 3,
      "testsuite": [
        {"name": "A", "status": "RUN", "result": "COMPLETED", "classname": "S"},
        {"name": "B", "status": "RUN", "result": "COMPLETED", "classname": "S",
         "failures": [{"failure": "suite.cpp:10\nExpected equality of these values:\n  3.5", "type": ""}]},
        {"name": "C", "status": "NOTRUN", "result": "SUPPRESSED", "classname": "S"},
        {"name": "D", "status": "RUN", "result": "SKIPPED", "classname": "S"}
      ]
    }]
  })";
  const auto out = parse_gtest_report(report);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].name, "S.A");
  EXPECT_TRUE(out[0].passed);
  EXPECT_FALSE(out[1].passed);
  EXPECT_NE(out[1].failure_text.find("3.5"), std::string::npos);
  EXPECT_EQ(out[2].name, "S.D");
  EXPECT_TRUE(out[2].passed);
}

TEST(GtestReport, RejectsNonReports) {
  EXPECT_THROW(parse_gtest_report("not json"), SyntaxError);
  EXPECT_THROW(parse_gtest_report("{\"tests\": 1}"), SyntaxError);
}

TEST(Summarize, AllPassIsEmptyFeedback) {
  const auto v = summarize_unit_tests(manifest(),
                                      outcomes({{"S.A", true}, {"S.B", true}, {"S.C", true}, {"S.D", true}}));
  EXPECT_EQ(v.total, 4u);
  EXPECT_EQ(v.failed, 0u);
  EXPECT_TRUE(v.feedback.empty());
}

TEST(Summarize, CountsByCategoryInNameOrder) {
  const auto v = summarize_unit_tests(manifest(),
                                      outcomes({{"S.A", false}, {"S.B", false}, {"S.C", false}, {"S.D", true}}));
  EXPECT_EQ(v.failed, 3u);
  EXPECT_EQ(v.feedback, "3/4 failed; categories: boundary×1, range×2");
  EXPECT_TRUE(feedback_is_clean(v.feedback, manifest()));
}

TEST(Summarize, MissingOutcomeCountsAsFailed) {
  const auto v = summarize_unit_tests(manifest(), outcomes({{"S.A", true}, {"S.B", true}, {"S.C", true}}));
  EXPECT_EQ(v.failed, 1u);
  EXPECT_EQ(v.feedback, "1/4 failed; categories: sign-convention×1");
}

TEST(Summarize, FallsBackWhenCountsWouldLeak) {
  // A literal "1/4" makes the counted form unusable.
  auto m = manifest();
  m.forbidden_substrings.push_back("1/4");
  const auto v = summarize_unit_tests(m, outcomes({{"S.A", true}, {"S.B", true}, {"S.C", true}}));
  EXPECT_EQ(v.feedback, "unit tests failed; categories: sign-convention");

  m.forbidden_substrings.push_back("sign");
  EXPECT_EQ(summarize_unit_tests(m, outcomes({{"S.A", true}})).feedback.substr(0, 17),
            "unit tests failed");
  m.forbidden_substrings.push_back("unit tests");
  EXPECT_EQ(summarize_unit_tests(m, outcomes({})).feedback, "FAIL");
  m.forbidden_substrings.push_back("FAIL");
  EXPECT_EQ(summarize_unit_tests(m, outcomes({})).feedback, "-");
}

TEST(Summarize, FeedbackNeverContainsFailureText) {
  std::vector<TestOutcome> o = {{"S.A", false, "expected 3.5 got 42 in EXPECT_EQ"}};
  const auto v = summarize_unit_tests(manifest(), o);
  EXPECT_TRUE(feedback_is_clean(v.feedback, manifest()));
  EXPECT_EQ(v.feedback.find("3.5"), std::string::npos);
}

}  // namespace
}  // namespace safegen
