// One PASS/FAIL line per acceptance criterion. Tolerances are pinned below.
#include <sys/stat.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "safegen/errors.hpp"
#include "safegen/orchestrator.hpp"
#include "safegen/sim/evaluator.hpp"
#include "safegen/sim/integration.hpp"
#include "safegen/sim/reference_controller.hpp"
#include "safegen/state_ledger.hpp"
#include "safegen/static_validation.hpp"
#include "test_support.hpp"

namespace {

using namespace safegen;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kEvaluatorTables = 1000;
constexpr double kEvaluatorSeconds = 5.0;
constexpr double kEpisodeSeconds = 10.0;
constexpr double kBandMin = 0.9;
constexpr double kAccelLimit = 5.0;
constexpr std::size_t kLedgerReplays = 100;
constexpr std::size_t kSanitizationScenarios = 50;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Independent re-statement of the two requirements, one sample at a time.
struct BruteForce {
  bool clearance_ok = true;
  bool accel_ok = true;
  bool band_ok = false;
  bool collision = false;
  bool passed = false;
  std::vector<std::size_t> clearance_bad;
  std::vector<std::size_t> accel_bad;
};

BruteForce brute_force(const sim::Telemetry& tel, const BehaviorSpec& b) {
  BruteForce out;
  std::size_t post = 0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < tel.samples.size(); ++i) {
    const auto& s = tel.samples[i];
    const double v = s.ego.speed;
    const double need = b.tau_min * v > b.c_min ? b.tau_min * v : b.c_min;
    const double a = s.ego.acceleration < 0 ? -s.ego.acceleration : s.ego.acceleration;
    bool accel_good = a <= 8.0;
    if (!s.command.emergency) accel_good = accel_good && a < b.a_limit;
    if (!accel_good) out.accel_bad.push_back(i);
    if (s.t >= b.settle_time) {
      ++post;
      if (!(s.gap >= need)) out.clearance_bad.push_back(i);
      if (b.band_low <= s.gap && s.gap <= b.band_high) ++inside;
    }
  }
  out.collision = tel.collided;
  out.clearance_ok = out.clearance_bad.empty();
  out.accel_ok = out.accel_bad.empty();
  out.band_ok = post > 0 && static_cast<double>(inside) >= b.band_occupancy_min * static_cast<double>(post);
  out.passed = !out.collision && out.clearance_ok && out.accel_ok && out.band_ok;
  return out;
}

sim::Telemetry random_telemetry(std::mt19937_64& rng, const BehaviorSpec& b) {
  std::uniform_int_distribution<int> len(0, 900);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = len(rng);
  const double dt = 0.05;
  sim::Telemetry tel;
  tel.dt = dt;
  // Some tables hug the acceptance boundaries so exact comparisons matter.
  const bool edgy = unit(rng) < 0.5;
  for (int i = 0; i < n; ++i) {
    sim::Sample s;
    s.t = (i + 1) * dt + (unit(rng) < 0.3 ? 10.0 : 0.0) * unit(rng);
    s.ego.speed = 20.0 * unit(rng);
    const double need = std::max(b.c_min, b.tau_min * s.ego.speed);
    if (edgy && unit(rng) < 0.3) {
      s.gap = need + (unit(rng) < 0.5 ? 0.0 : -1e-9);
    } else if (edgy && unit(rng) < 0.3) {
      s.gap = unit(rng) < 0.5 ? b.band_low : b.band_high;
    } else {
      s.gap = need - 2.0 + 12.0 * unit(rng);
    }
    const double mag = (edgy && unit(rng) < 0.2) ? (unit(rng) < 0.5 ? b.a_limit : 8.0)
                                                 : 9.0 * unit(rng);
    s.ego.acceleration = unit(rng) < 0.5 ? -mag : mag;
    s.command.emergency = unit(rng) < 0.15;
    tel.samples.push_back(s);
  }
  tel.collided = !tel.samples.empty() && unit(rng) < 0.1;
  if (tel.collided) tel.samples.back().gap = -0.01;
  return tel;
}

Verdict evaluator_correctness() {
  std::mt19937_64 rng(1);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  std::size_t failing_tables = 0;
  for (std::size_t k = 0; k < kEvaluatorTables; ++k) {
    BehaviorSpec b;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.3) {
      b.c_min = 1.0 + 3.0 * u(rng);
      b.tau_min = 2.0 * u(rng);
    }
    b.settle_time = 10.0 * u(rng);
    b.episode_duration = b.settle_time + 60.0;
    const auto tel = random_telemetry(rng, b);
    const auto got = sim::evaluate_data(tel, b);
    const auto want = brute_force(tel, b);
    const bool same = got.collision == want.collision && got.clearance_ok == want.clearance_ok &&
                      got.accel_ok == want.accel_ok && got.band_ok == want.band_ok &&
                      got.passed == want.passed && got.clearance_violations == want.clearance_bad &&
                      got.accel_violations == want.accel_bad;
    mismatches += same ? 0 : 1;
    failing_tables += want.passed ? 0 : 1;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kEvaluatorSeconds,
          std::to_string(kEvaluatorTables) + " tables, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(failing_tables) + " failing, " + fmt("%.2f s", secs)};
}

Verdict reference_behavior() {
  const BehaviorSpec b;
  bool ok = true;
  std::string detail;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const std::uint64_t seed = b.seed + i;
    const auto t0 = Clock::now();
    const auto tel = sim::run_episode(sim::reference_endpoint(b), b, sim::SimConfig{}, seed);
    const double secs = seconds_since(t0);
    const auto r = sim::evaluate_data(tel, b);
    const bool full_length = tel.samples.size() == 2400;
    // Emergency samples included: the reference never brakes past the limit.
    const bool episode_ok = full_length && !r.collision && r.band_occupancy >= kBandMin &&
                            r.peak_abs_accel_non_emergency < kAccelLimit && r.peak_abs_accel < kAccelLimit &&
                            secs < kEpisodeSeconds;
    ok = ok && episode_ok;
    if (!detail.empty()) detail += "; ";
    detail += "seed " + std::to_string(seed) + ": band " + fmt("%.3f", r.band_occupancy) + ", peak |a| " +
              fmt("%.2f", r.peak_abs_accel) + (r.collision ? ", collision" : "") + ", " + fmt("%.2f s", secs);
  }
  return {ok, detail};
}

Verdict state_machine_soundness() {
  bool ok = true;
  std::size_t legal = 0;
  for (auto k : kAllStateKinds) {
    for (auto e : kAllEvents) {
      const auto next = next_kind(k, e);
      if (!next) continue;
      ++legal;
      if (*next == VersionStateKind::Safe && k != VersionStateKind::Verified) ok = false;
      if (k == VersionStateKind::Safe) ok = false;
    }
  }
  // Safe must be reachable from Draft at all.
  std::set<VersionStateKind> seen{VersionStateKind::Draft};
  std::vector<VersionStateKind> frontier{VersionStateKind::Draft};
  while (!frontier.empty()) {
    const auto k = frontier.back();
    frontier.pop_back();
    for (auto e : kAllEvents) {
      if (auto n = next_kind(k, e); n && seen.insert(*n).second) frontier.push_back(*n);
    }
  }
  ok = ok && seen.contains(VersionStateKind::Safe);

  std::mt19937_64 rng(2);
  std::size_t replay_mismatches = 0;
  testing::TempDir dir;
  for (std::size_t trial = 0; trial < kLedgerReplays; ++trial) {
    const auto path = dir / ("ledger-" + std::to_string(trial) + ".jsonl");
    Ledger ledger = Ledger::open(path, [] { return std::string("1970-01-01T00:00:00.000Z"); });
    ledger.begin_run();
    VersionState state;
    const std::size_t n = 1 + rng() % 15;
    for (std::size_t i = 0; i < n && state.kind != VersionStateKind::Safe; ++i) {
      const std::size_t stop = rng() % 6;
      std::vector<CheckOutcome> outcomes;
      for (std::size_t c = 0; c < kStaticChecks.size(); ++c) {
        outcomes.push_back({kStaticChecks[c], c < stop});
        if (c >= stop) break;
      }
      if (stop >= 4) outcomes.push_back({CheckKind::Integration, stop == 5});
      if (stop < 4) {
        state = transition(state, StateEvent::StaticCheckFailed);
      } else {
        state = transition(state, StateEvent::AllStaticChecksPassed);
        state = transition(state, stop == 5 ? StateEvent::IntegrationPassed : StateEvent::IntegrationFailed);
      }
      ledger.record(make_artifact(std::to_string(trial * 100 + i), "cpp"), state, outcomes, std::nullopt);
    }
    const auto records = Ledger::load(path);
    if (!(replay(records) == state) || !(records.back().state == state)) ++replay_mismatches;
  }
  ok = ok && replay_mismatches == 0;
  return {ok, std::to_string(legal) + " legal transitions, " + std::to_string(kLedgerReplays) +
                  " ledger replays, " + std::to_string(replay_mismatches) + " mismatches"};
}

std::string strip(std::string s, const std::string& prefix) {
  for (auto pos = s.find(prefix); pos != std::string::npos; pos = s.find(prefix)) s.erase(pos, prefix.size());
  return s;
}

Verdict pipeline_determinism() {
  std::vector<std::string> reports;
  std::vector<std::vector<CandidateRecord>> ledgers;
  bool shape_ok = true;
  std::string detail;
  for (int run = 0; run < 2; ++run) {
    testing::TempDir out;
    const auto config = testing::acc_config(out.path(), "staged");
    auto backend = make_backend(config);
    const RunReport r = run_full_pipeline(config, *backend);
    shape_ok = shape_ok && r.outcome == RunOutcome::Safe && r.total_candidates == 5 &&
               r.failure_counts == std::array<std::size_t, 4>{1, 1, 1, 1} &&
               r.final_state.kind == VersionStateKind::Safe;
    reports.push_back(strip(to_json(r, false), out.path().string()));
    auto recs = Ledger::load(config.ledger);
    for (auto& rec : recs) rec.created_at.clear();
    ledgers.push_back(recs);
    if (run == 0) {
      detail = std::to_string(r.total_candidates) + " candidates, failures [" +
               std::to_string(r.failure_counts[0]) + "," + std::to_string(r.failure_counts[1]) + "," +
               std::to_string(r.failure_counts[2]) + "," + std::to_string(r.failure_counts[3]) + "], " +
               std::string(to_string(r.final_state.kind));
    }
  }
  const bool same = reports[0] == reports[1] && ledgers[0] == ledgers[1];
  return {shape_ok && same, detail + (same ? ", repeat identical" : ", repeat differs")};
}

// A fake gtest binary: copies the pre-rendered report for the requested test.
Verdict sanitization_soundness() {
  std::mt19937_64 rng(3);
  const std::vector<std::string> categories = {"boundary", "range", "sign-convention", "timing", "monotonicity"};
  std::size_t leaks = 0;
  std::size_t raw_missing = 0;
  std::size_t errors = 0;
  testing::TempDir root;
  for (std::size_t sc = 0; sc < kSanitizationScenarios; ++sc) {
    const auto dir = root / ("scenario-" + std::to_string(sc));
    std::filesystem::create_directories(dir / "reports");
    const std::string suite = "Suite" + std::to_string(rng() % 1000);
    const std::size_t n = 2 + rng() % 10;
    std::string manifest = "{\"sources\": [\"suite.cpp\"], \"forbidden_substrings\": [\"EXPECT_\"], \"tests\": [";
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> literals;
    std::vector<bool> fails;
    bool any_fail = false;
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back(suite + ".Case" + std::to_string(i) + "_" + std::to_string(rng() % 100000));
      literals.push_back({std::to_string(rng() % 90 + 10) + "." + std::to_string(rng() % 900 + 100),
                          "-" + std::to_string(rng() % 50 + 1) + ".25"});
      fails.push_back(rng() % 2 == 0);
      any_fail = any_fail || fails.back();
      manifest += std::string(i ? "," : "") + "{\"name\": \"" + names[i] + "\", \"category\": \"" +
                  categories[rng() % categories.size()] + "\", \"expected_literals\": [\"" +
                  literals[i][0] + "\", \"" + literals[i][1] + "\"]}";
    }
    if (!any_fail) fails[0] = true;
    manifest += "]}";
    testing::spit(dir / "manifest.json", manifest);
    testing::spit(dir / "suite.cpp", "// unused\n");
    for (std::size_t i = 0; i < n; ++i) {
      const auto dot = names[i].find('.');
      std::string failures = "[]";
      if (fails[i]) {
        failures = "[{\"failure\": \"suite.cpp:" + std::to_string(10 + i) + "\\nEXPECT_NEAR failed in " +
                   names[i] + ": expected " + literals[i][0] + " and " + literals[i][1] + "\", \"type\": \"\"}]";
      }
      testing::spit(dir / "reports" / (names[i] + ".json"),
                    "{\"testsuites\": [{\"name\": \"" + suite + "\", \"testsuite\": [{\"name\": \"" +
                        names[i].substr(dot + 1) + "\", \"classname\": \"" + suite +
                        "\", \"status\": \"RUN\", \"result\": \"COMPLETED\", \"failures\": " + failures +
                        "}]}]}\n");
    }
    const auto script = dir / "fake_suite.sh";
    testing::spit(script,
                  "#!/bin/sh\n"
                  "t=\"${1#--gtest_filter=}\"\n"
                  "r=\"${2#--gtest_output=json:}\"\n"
                  "cat \"" + (dir / "reports").string() + "/$t.json\"\n"
                  "cp \"" + (dir / "reports").string() + "/$t.json\" \"$r\"\n");
    ::chmod(script.c_str(), 0755);

    ToolchainConfig tc;
    tc.test_compile = {"true"};
    tc.test_link = {"cp", script.string(), "{binary}"};
    const auto m = load_test_manifest(dir / "manifest.json");
    Workspace ws = Workspace::create(sc, root.path());
    ws.write_source("int unused;\n");
    const auto r = check_unit_tests(ws, tc, m);
    if (r.status != CheckStatus::Fail) {
      ++errors;
      continue;
    }
    for (const auto& f : m.all_forbidden()) {
      if (r.sanitized_feedback.find(f) != std::string::npos) ++leaks;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!fails[i]) continue;
      for (const std::string& needle : {names[i], literals[i][0], literals[i][1]}) {
        if (r.raw_diagnostics.find(needle) == std::string::npos) ++raw_missing;
      }
    }
  }

  // The shipped suite against the real failing fixture.
  const auto acc_suite = load_test_manifest(testing::acc_dir() / "unit_tests" / "manifest.json");
  ToolchainConfig tc;
  tc.api_include = testing::acc_dir() / "include";
  Workspace ws = Workspace::create(999, root.path());
  ws.write_source(testing::candidate("test_failing"));
  bool real_ok = check_compile(ws, tc).status == CheckStatus::Pass;
  const auto real = check_unit_tests(ws, tc, acc_suite);
  real_ok = real_ok && real.status == CheckStatus::Fail && feedback_is_clean(real.sanitized_feedback, acc_suite) &&
            real.raw_diagnostics.find("AccSuite.EmergencyBelowTimeGap") != std::string::npos;

  return {leaks == 0 && raw_missing == 0 && errors == 0 && real_ok,
          std::to_string(kSanitizationScenarios) + " scenarios, " + std::to_string(leaks) + " leaks, " +
              std::to_string(raw_missing) + " raw omissions, " + std::to_string(errors) +
              " errors; shipped suite " + (real_ok ? "clean" : "LEAKED") + ": \"" + real.sanitized_feedback + "\""};
}

Verdict simulation_determinism() {
  const BehaviorSpec b;
  bool ok = true;
  std::size_t bytes = 0;
  const auto process = sim::ControllerEndpoint::process({SAFEGEN_REFERENCE_CONTROLLER});
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto a = sim::to_csv(sim::run_episode(sim::reference_endpoint(b), b, sim::SimConfig{}, seed));
    const auto c = sim::to_csv(sim::run_episode(sim::reference_endpoint(b), b, sim::SimConfig{}, seed));
    const auto p1 = sim::to_csv(sim::run_episode(process, b, sim::SimConfig{}, seed));
    const auto p2 = sim::to_csv(sim::run_episode(process, b, sim::SimConfig{}, seed));
    ok = ok && a == c && p1 == p2 && a == p1;
    bytes += a.size();
  }
  return {ok, "3 seeds, in-process and child-process runs, " + std::to_string(bytes) + " CSV bytes compared"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"evaluator-agrees-with-brute-force", evaluator_correctness},
      {"reference-controller-behaviour", reference_behavior},
      {"state-machine-soundness", state_machine_soundness},
      {"staged-replay-determinism", pipeline_determinism},
      {"feedback-sanitization", sanitization_soundness},
      {"simulation-determinism", simulation_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
