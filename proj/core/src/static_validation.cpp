#include "safegen/static_validation.hpp"

#include <stdlib.h>

#include <algorithm>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "safegen/errors.hpp"
#include "safegen/signature_matcher.hpp"
#include "safegen/subprocess.hpp"
#include "util.hpp"

namespace safegen {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

std::chrono::milliseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

RunOptions run_options(const ToolchainConfig& tc, std::chrono::milliseconds timeout) {
  RunOptions o;
  o.timeout = timeout;
  o.output_cap = tc.output_cap;
  return o;
}

std::string describe(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

/// Launch failure or timeout as a ToolError result; nullopt if neither.
std::optional<CheckResult> tool_fault(CheckKind kind, const CommandResult& r,
                                      const std::vector<std::string>& argv,
                                      std::chrono::milliseconds timeout) {
  CheckResult res;
  res.kind = kind;
  res.status = CheckStatus::ToolError;
  if (!r.launched) {
    res.sanitized_feedback = r.launch_error;
  } else if (r.timed_out) {
    res.sanitized_feedback = "tool timed out after " + std::to_string(timeout.count()) + " ms";
  } else {
    return std::nullopt;
  }
  res.raw_diagnostics = describe(argv) + "\n" + r.output;
  return res;
}

TemplateVars base_vars(const Workspace& ws, const ToolchainConfig& tc) {
  TemplateVars v;
  v.scalars = {{"source", ws.source().string()},
               {"object", ws.object().string()},
               {"api_include", tc.api_include.string()}};
  return v;
}

Severity severity_for(const std::string& rule, Severity reported, const ToolchainConfig& tc) {
  if (const auto it = tc.rule_severity.find(rule); it != tc.rule_severity.end()) return it->second;
  std::size_t best_len = 0;
  std::optional<Severity> best;
  for (const auto& [pattern, sev] : tc.rule_severity) {
    if (pattern.empty() || pattern.back() != '*') continue;
    const std::string_view prefix(pattern.data(), pattern.size() - 1);
    if (rule.starts_with(prefix) && prefix.size() >= best_len) {
      best_len = prefix.size();
      best = sev;
    }
  }
  return best.value_or(reported);
}

}  // namespace

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "Pass";
    case CheckStatus::Fail:
      return "Fail";
    case CheckStatus::ToolError:
      return "ToolError";
  }
  return "Pass";
}

Severity parse_severity(std::string_view text) {
  const std::string t = detail::to_lower(text);
  if (t == "note" || t == "info" || t == "remark") return Severity::Note;
  if (t == "warning") return Severity::Warning;
  if (t == "error") return Severity::Error;
  throw ConfigError("unknown severity '" + std::string(text) + "'");
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Note:
      return "note";
    case Severity::Warning:
      return "warning";
    case Severity::Error:
      return "error";
  }
  return "warning";
}

Workspace Workspace::create(std::uint64_t candidate_id, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  std::string templ = (root / ("safegen-c" + std::to_string(candidate_id) + "-XXXXXX")).string();
  if (::mkdtemp(templ.data()) == nullptr) {
    throw ToolError("cannot create workspace under " + root.string());
  }
  return Workspace(fs::path(templ));
}

Workspace::Workspace(Workspace&& other) noexcept
    : dir_(std::move(other.dir_)), keep_(other.keep_) {
  other.dir_.clear();
}

Workspace::~Workspace() {
  if (!keep_ && !dir_.empty()) {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
}

void Workspace::write_source(std::string_view code) const {
  try {
    detail::write_text_file(source(), code);
  } catch (const StorageError& e) {
    throw ToolError(e.what());
  }
}

CheckResult check_structure(const SourceArtifact& artifact, const DesignSpec& design) {
  const auto start = Clock::now();
  CheckResult res;
  res.kind = CheckKind::Structure;
  std::vector<std::string> problems;

  const auto defs = find_definitions(artifact.code, design.function_name);
  const std::size_t want = design.inputs.size();
  if (defs.empty()) {
    std::string seen;
    for (const auto& d : find_all_definitions(artifact.code)) {
      if (!seen.empty()) seen += ", ";
      seen += d.name;
    }
    problems.push_back("missing file-scope definition of '" + design.function_name + "'" +
                       (seen.empty() ? std::string() : " (found: " + seen + ")"));
  } else if (std::none_of(defs.begin(), defs.end(),
                          [&](const FunctionDefinition& d) { return d.arity == want; })) {
    problems.push_back("arity mismatch: '" + design.function_name + "' defined at line " +
                       std::to_string(defs.front().line) + " takes " +
                       std::to_string(defs.front().arity) + " parameter(s), expected " +
                       std::to_string(want));
  }
  for (const auto& dep : verify_dependencies(artifact, design)) {
    problems.push_back("dependency not permitted by the design: " + dep);
  }

  for (const auto& p : problems) {
    if (!res.sanitized_feedback.empty()) res.sanitized_feedback += "\n";
    res.sanitized_feedback += p;
  }
  res.status = problems.empty() ? CheckStatus::Pass : CheckStatus::Fail;
  res.raw_diagnostics = res.sanitized_feedback;
  res.duration = since(start);
  return res;
}

std::string sanitize_compiler_output(std::string_view output, std::size_t max_lines) {
  static const std::regex abs_dir(R"((^|[\s'"(\[`])(/[^\s/:'"()]+)+/)");
  std::istringstream in{std::string(output)};
  std::string line;
  std::string out;
  std::size_t n = 0;
  while (n < max_lines && std::getline(in, line)) {
    out += std::regex_replace(line, abs_dir, "$1");
    out += '\n';
    ++n;
  }
  if (!out.empty()) out.pop_back();
  return out;
}

CheckResult check_compile(const Workspace& ws, const ToolchainConfig& tc) {
  const auto start = Clock::now();
  const auto argv = expand_command(tc.compile, base_vars(ws, tc));
  const auto r = run_command(argv, run_options(tc, tc.tool_timeout));
  if (auto fault = tool_fault(CheckKind::Compile, r, argv, tc.tool_timeout)) {
    fault->duration = since(start);
    return *fault;
  }
  CheckResult res;
  res.kind = CheckKind::Compile;
  res.raw_diagnostics = r.output;
  if (r.ok()) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    res.sanitized_feedback = sanitize_compiler_output(r.output, tc.diagnostic_lines);
    if (res.sanitized_feedback.empty()) {
      res.sanitized_feedback = r.signaled ? "compiler killed by signal " + std::to_string(r.signal)
                                          : "compiler exited with status " + std::to_string(r.exit_code);
    }
  }
  res.duration = since(start);
  return res;
}

std::vector<StyleFinding> parse_style_report(std::string_view yaml_text,
                                             std::string_view source_text,
                                             const ToolchainConfig& tc) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw SyntaxError(std::string("style report: ") + e.what());
  }
  if (!doc.IsMap() || !doc["Diagnostics"]) throw SyntaxError("style report: no Diagnostics key");
  const YAML::Node diags = doc["Diagnostics"];
  std::vector<StyleFinding> out;
  if (diags.IsNull()) return out;
  if (!diags.IsSequence()) throw SyntaxError("style report: Diagnostics is not a list");
  try {
    for (const auto& d : diags) {
      StyleFinding f;
      f.rule = d["DiagnosticName"].as<std::string>();
      const YAML::Node msg = d["DiagnosticMessage"];
      if (!msg || !msg.IsMap()) throw SyntaxError("style report: diagnostic without a message");
      f.message = msg["Message"].as<std::string>();
      if (msg["FileOffset"]) {
        const auto offset = std::min<std::size_t>(msg["FileOffset"].as<std::size_t>(), source_text.size());
        f.line = 1 + static_cast<std::size_t>(
                         std::count(source_text.begin(),
                                    source_text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
      }
      const Severity reported =
          d["Level"] ? parse_severity(d["Level"].as<std::string>()) : Severity::Warning;
      f.severity = severity_for(f.rule, reported, tc);
      out.push_back(std::move(f));
    }
  } catch (const YAML::Exception& e) {
    throw SyntaxError(std::string("style report: ") + e.what());
  } catch (const ConfigError& e) {
    throw SyntaxError(std::string("style report: ") + e.what());
  }
  return out;
}

CheckResult check_style(const Workspace& ws, const ToolchainConfig& tc) {
  const auto start = Clock::now();
  const fs::path report = ws.dir() / "style-report.yaml";
  std::error_code ec;
  fs::remove(report, ec);

  std::string rules;
  for (const auto& r : tc.lint_rules) {
    if (!rules.empty()) rules += ',';
    rules += r;
  }
  auto vars = base_vars(ws, tc);
  vars.scalars.emplace_back("rules", rules);
  vars.scalars.emplace_back("report", report.string());
  const auto argv = expand_command(tc.lint, vars);
  const auto r = run_command(argv, run_options(tc, tc.tool_timeout));
  CheckResult res;
  res.kind = CheckKind::StyleDesign;
  if (auto fault = tool_fault(CheckKind::StyleDesign, r, argv, tc.tool_timeout)) {
    fault->duration = since(start);
    return *fault;
  }
  res.raw_diagnostics = r.output;

  std::vector<StyleFinding> findings;
  if (fs::exists(report)) {
    const std::string yaml = detail::read_text_file<ToolError>(report);
    res.raw_diagnostics += "\n--- report ---\n" + yaml;
    try {
      findings = parse_style_report(yaml, detail::read_text_file<ToolError>(ws.source()), tc);
    } catch (const SyntaxError& e) {
      res.status = CheckStatus::ToolError;
      res.sanitized_feedback = e.what();
      res.duration = since(start);
      return res;
    }
  } else if (r.exit_code != 0 || r.signaled) {
    // A failing analyzer that wrote nothing tells us nothing about the code.
    res.status = CheckStatus::ToolError;
    res.sanitized_feedback = "analyzer failed without a report (exit " +
                             std::to_string(r.exit_code) + ")";
    res.duration = since(start);
    return res;
  }

  std::erase_if(findings, [&](const StyleFinding& f) { return f.severity < tc.severity_threshold; });
  std::stable_sort(findings.begin(), findings.end(),
                   [](const StyleFinding& a, const StyleFinding& b) { return a.line < b.line; });
  if (findings.empty()) {
    res.status = CheckStatus::Pass;
  } else {
    res.status = CheckStatus::Fail;
    const std::size_t shown = std::min(findings.size(), tc.max_style_findings);
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& f = findings[i];
      if (!res.sanitized_feedback.empty()) res.sanitized_feedback += '\n';
      res.sanitized_feedback += "line " + std::to_string(f.line) + ": [" + f.rule + "] " + f.message;
    }
    if (findings.size() > shown) {
      res.sanitized_feedback += "\n(" + std::to_string(findings.size() - shown) + " more findings)";
    }
  }
  res.duration = since(start);
  return res;
}

CheckResult check_unit_tests(const Workspace& ws, const ToolchainConfig& tc,
                             const TestSuiteManifest& suite) {
  const auto start = Clock::now();
  CheckResult res;
  res.kind = CheckKind::UnitTest;
  auto fail_tool = [&](std::string feedback) {
    res.status = CheckStatus::ToolError;
    res.sanitized_feedback = std::move(feedback);
    res.duration = since(start);
    return res;
  };
  if (tc.report_format != "gtest-json") {
    return fail_tool("unsupported test report format '" + tc.report_format + "'");
  }

  const fs::path test_dir = ws.dir() / "tests";
  std::error_code ec;
  fs::create_directories(test_dir, ec);
  std::vector<std::string> objects;
  for (std::size_t i = 0; i < suite.sources.size(); ++i) {
    const fs::path obj = test_dir / (std::to_string(i) + "_" + suite.sources[i].stem().string() + ".o");
    auto vars = base_vars(ws, tc);
    vars.scalars.emplace_back("test_source", suite.sources[i].string());
    vars.scalars.emplace_back("test_object", obj.string());
    const auto argv = expand_command(tc.test_compile, vars);
    const auto r = run_command(argv, run_options(tc, tc.tool_timeout));
    res.raw_diagnostics += "$ " + describe(argv) + "\n" + r.output;
    if (!r.ok()) {
      // The suite does not depend on the candidate, so this is a harness fault.
      return fail_tool(!r.launched   ? r.launch_error
                       : r.timed_out ? "test harness compile timed out"
                                     : "test harness failed to compile");
    }
    objects.push_back(obj.string());
  }

  const fs::path binary = test_dir / "unit_tests";
  {
    auto vars = base_vars(ws, tc);
    vars.scalars.emplace_back("binary", binary.string());
    vars.lists.emplace_back("test_objects", objects);
    const auto argv = expand_command(tc.test_link, vars);
    const auto r = run_command(argv, run_options(tc, tc.tool_timeout));
    res.raw_diagnostics += "$ " + describe(argv) + "\n" + r.output;
    if (!r.launched) return fail_tool(r.launch_error);
    if (r.timed_out) return fail_tool("test harness link timed out");
    if (!r.ok()) {
      res.status = CheckStatus::Fail;
      res.sanitized_feedback =
          "the unit-test harness could not link against the candidate; check the "
          "function signature and parameter types against the design";
      res.duration = since(start);
      return res;
    }
  }

  std::vector<TestOutcome> outcomes;
  for (std::size_t i = 0; i < suite.tests.size(); ++i) {
    const auto& test = suite.tests[i];
    const fs::path report = test_dir / ("report_" + std::to_string(i) + ".json");
    fs::remove(report, ec);
    auto vars = base_vars(ws, tc);
    vars.scalars.emplace_back("binary", binary.string());
    vars.scalars.emplace_back("test", test.name);
    vars.scalars.emplace_back("report", report.string());
    const auto argv = expand_command(tc.test_run, vars);
    const auto r = run_command(argv, run_options(tc, tc.test_timeout));
    res.raw_diagnostics += "$ " + describe(argv) + "\n" + r.output;
    if (!r.launched) return fail_tool(r.launch_error);
    if (r.timed_out) return fail_tool("timeout; category: " + test.category);
    if (!fs::exists(report)) return fail_tool("crash before report; category: " + test.category);
    const std::string json = detail::read_text_file<ToolError>(report);
    res.raw_diagnostics += json;
    std::vector<TestOutcome> parsed;
    try {
      parsed = parse_gtest_report(json);
    } catch (const SyntaxError&) {
      return fail_tool("malformed test report; category: " + test.category);
    }
    const auto it = std::find_if(parsed.begin(), parsed.end(),
                                 [&](const TestOutcome& o) { return o.name == test.name; });
    if (it == parsed.end()) return fail_tool("declared test missing from the report; category: " + test.category);
    outcomes.push_back(*it);
  }

  const auto verdict = summarize_unit_tests(suite, outcomes);
  res.status = verdict.failed == 0 ? CheckStatus::Pass : CheckStatus::Fail;
  res.sanitized_feedback = verdict.feedback;
  res.duration = since(start);
  return res;
}

StaticPipelineResult run_static_pipeline(const SourceArtifact& artifact, const DesignSpec& design,
                                         const ToolchainConfig& tc, const TestSuiteManifest& suite,
                                         const Workspace& ws) {
  StaticPipelineResult out;
  ws.write_source(artifact.code);
  for (const CheckKind kind : kStaticChecks) {
    CheckResult r;
    switch (kind) {
      case CheckKind::Structure:
        r = check_structure(artifact, design);
        break;
      case CheckKind::Compile:
        r = check_compile(ws, tc);
        break;
      case CheckKind::StyleDesign:
        r = check_style(ws, tc);
        break;
      case CheckKind::UnitTest:
        r = check_unit_tests(ws, tc, suite);
        break;
      case CheckKind::Integration:
        break;
    }
    if (r.status == CheckStatus::ToolError) {
      throw ToolError(std::string(to_string(kind)) + ": " + r.sanitized_feedback);
    }
    const bool failed = r.status == CheckStatus::Fail;
    out.results.push_back(std::move(r));
    if (failed) {
      out.error_analysis = out.results.back().sanitized_feedback;
      return out;
    }
  }
  out.passed = true;
  return out;
}

}  // namespace safegen
