#include "safegen/unit_test_report.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

using nlohmann::json;

namespace {

constexpr std::string_view kTimes = "\xC3\x97";  // U+00D7 MULTIPLICATION SIGN

std::string string_at(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw SchemaError(path + "." + key, "missing required key");
  if (!obj[key].is_string()) throw SchemaError(path + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

std::vector<std::string> strings_at(const json& obj, const char* key, const std::string& path,
                                    bool required) {
  std::vector<std::string> out;
  if (!obj.contains(key)) {
    if (required) throw SchemaError(path + "." + key, "missing required key");
    return out;
  }
  const json& arr = obj[key];
  if (!arr.is_array()) throw SchemaError(path + "." + key, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      throw SchemaError(path + "." + key + "[" + std::to_string(i) + "]", "expected a string");
    }
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> TestSuiteManifest::all_forbidden() const {
  std::vector<std::string> out = forbidden_substrings;
  for (const auto& t : tests) {
    out.push_back(t.name);
    out.insert(out.end(), t.expected_literals.begin(), t.expected_literals.end());
  }
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

const TestCaseSpec* TestSuiteManifest::find(std::string_view name) const {
  for (const auto& t : tests) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

TestSuiteManifest parse_test_manifest(std::string_view json_text,
                                      const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("test manifest: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("$", "expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "sources" && key != "tests" && key != "forbidden_substrings") {
      throw SchemaError("$." + key, "unknown key");
    }
  }
  TestSuiteManifest m;
  for (const auto& src : strings_at(doc, "sources", "$", true)) {
    std::filesystem::path p(src);
    m.sources.push_back(p.is_absolute() ? p : base_dir / p);
  }
  if (m.sources.empty()) throw SchemaError("$.sources", "at least one source is required");
  if (!doc.contains("tests") || !doc["tests"].is_array()) {
    throw SchemaError("$.tests", "expected an array");
  }
  const json& tests = doc["tests"];
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const std::string path = "$.tests[" + std::to_string(i) + "]";
    const json& t = tests[i];
    if (!t.is_object()) throw SchemaError(path, "expected an object");
    for (const auto& [key, _] : t.items()) {
      if (key != "name" && key != "category" && key != "expected_literals") {
        throw SchemaError(path + "." + key, "unknown key");
      }
    }
    TestCaseSpec spec{string_at(t, "name", path), string_at(t, "category", path),
                      strings_at(t, "expected_literals", path, false)};
    if (spec.name.empty()) throw SchemaError(path + ".name", "must not be empty");
    if (spec.category.empty()) throw SchemaError(path + ".category", "must not be empty");
    if (m.find(spec.name)) throw SchemaError(path + ".name", "duplicate test " + spec.name);
    m.tests.push_back(std::move(spec));
  }
  if (m.tests.empty()) throw SchemaError("$.tests", "at least one test is required");
  m.forbidden_substrings = strings_at(doc, "forbidden_substrings", "$", false);

  const auto forbidden = m.all_forbidden();
  for (const auto& t : m.tests) {
    for (const auto& f : forbidden) {
      if (t.category.find(f) != std::string::npos) {
        throw ConfigError("category '" + t.category + "' contains the forbidden substring '" + f +
                          "'");
      }
    }
  }
  return m;
}

TestSuiteManifest load_test_manifest(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  return parse_test_manifest(text, path.parent_path());
}

std::vector<TestOutcome> parse_gtest_report(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("test report: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("testsuites") || !doc["testsuites"].is_array()) {
    throw SyntaxError("test report: missing testsuites array");
  }
  std::vector<TestOutcome> out;
  for (const auto& suite : doc["testsuites"]) {
    if (!suite.is_object() || !suite.contains("testsuite")) continue;
    const std::string suite_name = suite.value("name", "");
    for (const auto& tc : suite["testsuite"]) {
      if (!tc.is_object() || !tc.contains("name")) {
        throw SyntaxError("test report: test entry without a name");
      }
      // Filtered-out and disabled tests are listed but did not run.
      if (tc.value("status", "RUN") != "RUN") continue;
      std::string result = tc.value("result", "COMPLETED");
      TestOutcome o;
      o.name = tc.value("classname", suite_name) + "." + tc["name"].get<std::string>();
      const bool has_failures =
          tc.contains("failures") && tc["failures"].is_array() && !tc["failures"].empty();
      o.passed = !has_failures && (result == "COMPLETED" || result == "SKIPPED");
      if (has_failures) {
        for (const auto& f : tc["failures"]) {
          if (!o.failure_text.empty()) o.failure_text += "\n";
          o.failure_text += f.value("failure", "");
        }
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

bool feedback_is_clean(std::string_view feedback, const TestSuiteManifest& manifest) {
  for (const auto& f : manifest.all_forbidden()) {
    if (feedback.find(f) != std::string_view::npos) return false;
  }
  return true;
}

UnitTestVerdict summarize_unit_tests(const TestSuiteManifest& manifest,
                                     std::span<const TestOutcome> outcomes) {
  UnitTestVerdict v;
  v.total = manifest.tests.size();
  std::map<std::string, std::size_t> by_category;
  for (const auto& t : manifest.tests) {
    const auto it = std::find_if(outcomes.begin(), outcomes.end(),
                                 [&](const TestOutcome& o) { return o.name == t.name; });
    if (it == outcomes.end() || !it->passed) {
      ++v.failed;
      ++by_category[t.category];
    }
  }
  if (v.failed == 0) return v;

  std::string counted;
  std::string plain;
  for (const auto& [category, n] : by_category) {
    if (!counted.empty()) {
      counted += ", ";
      plain += ", ";
    }
    counted += category + std::string(kTimes) + std::to_string(n);
    plain += category;
  }
  const std::string candidates[] = {
      std::to_string(v.failed) + "/" + std::to_string(v.total) + " failed; categories: " + counted,
      "unit tests failed; categories: " + plain,
      "unit tests failed",
  };
  for (const auto& c : candidates) {
    if (feedback_is_clean(c, manifest)) {
      v.feedback = c;
      return v;
    }
  }
  v.feedback = "FAIL";
  if (!feedback_is_clean(v.feedback, manifest)) v.feedback = "-";
  return v;
}

}  // namespace safegen
