#include "safegen/state_ledger.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

using nlohmann::json;

std::string_view to_string(CheckKind kind) {
  switch (kind) {
    case CheckKind::Structure:
      return "Structure";
    case CheckKind::Compile:
      return "Compile";
    case CheckKind::StyleDesign:
      return "StyleDesign";
    case CheckKind::UnitTest:
      return "UnitTest";
    case CheckKind::Integration:
      return "Integration";
  }
  return "Structure";
}

std::optional<CheckKind> parse_check_kind(std::string_view text) {
  for (auto k : {CheckKind::Structure, CheckKind::Compile, CheckKind::StyleDesign,
                 CheckKind::UnitTest, CheckKind::Integration}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(VersionStateKind kind) {
  switch (kind) {
    case VersionStateKind::Draft:
      return "Draft";
    case VersionStateKind::StaticFailed:
      return "StaticFailed";
    case VersionStateKind::Verified:
      return "Verified";
    case VersionStateKind::IntegrationFailed:
      return "IntegrationFailed";
    case VersionStateKind::Safe:
      return "Safe";
  }
  return "Draft";
}

std::optional<VersionStateKind> parse_state_kind(std::string_view text) {
  for (auto k : kAllStateKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(StateEvent event) {
  switch (event) {
    case StateEvent::StaticCheckFailed:
      return "StaticCheckFailed";
    case StateEvent::AllStaticChecksPassed:
      return "AllStaticChecksPassed";
    case StateEvent::IntegrationFailed:
      return "IntegrationFailed";
    case StateEvent::IntegrationPassed:
      return "IntegrationPassed";
  }
  return "StaticCheckFailed";
}

std::optional<VersionStateKind> next_kind(VersionStateKind kind, StateEvent event) {
  using K = VersionStateKind;
  switch (kind) {
    case K::Draft:
    case K::StaticFailed:
    case K::IntegrationFailed:
      if (event == StateEvent::StaticCheckFailed) return K::StaticFailed;
      if (event == StateEvent::AllStaticChecksPassed) return K::Verified;
      return std::nullopt;
    case K::Verified:
      if (event == StateEvent::IntegrationFailed) return K::IntegrationFailed;
      if (event == StateEvent::IntegrationPassed) return K::Safe;
      return std::nullopt;
    case K::Safe:
      return std::nullopt;
  }
  return std::nullopt;
}

VersionState transition(const VersionState& state, StateEvent event) {
  const auto next = next_kind(state.kind, event);
  if (!next) {
    throw IllegalTransition("illegal transition " + std::string(to_string(state.kind)) +
                            " --" + std::string(to_string(event)) + "-->");
  }
  VersionState out = state;
  out.kind = *next;
  if (event == StateEvent::StaticCheckFailed) ++out.static_iterations;
  if (event == StateEvent::IntegrationFailed) ++out.integration_iterations;
  return out;
}

std::size_t CandidateRecord::passed_checks() const {
  std::size_t n = 0;
  for (const auto& o : check_outcomes) n += o.passed ? 1 : 0;
  return n;
}

std::vector<StateEvent> events_for(const CandidateRecord& record) {
  std::vector<StateEvent> events;
  bool static_failed = false;
  std::size_t static_passed = 0;
  std::optional<bool> integration;
  for (const auto& o : record.check_outcomes) {
    if (o.check == CheckKind::Integration) {
      integration = o.passed;
    } else if (o.passed) {
      ++static_passed;
    } else {
      static_failed = true;
    }
  }
  if (static_failed) {
    events.push_back(StateEvent::StaticCheckFailed);
    return events;
  }
  if (static_passed == kStaticChecks.size()) {
    events.push_back(StateEvent::AllStaticChecksPassed);
    if (integration) {
      events.push_back(*integration ? StateEvent::IntegrationPassed
                                    : StateEvent::IntegrationFailed);
    }
  }
  return events;
}

VersionState replay(std::span<const CandidateRecord> records) {
  VersionState state;
  for (const auto& r : records) {
    for (auto e : events_for(r)) state = transition(state, e);
  }
  return state;
}

std::optional<CandidateRecord> best_prior(std::span<const CandidateRecord> records) {
  const CandidateRecord* best = nullptr;
  for (const auto& r : records) {
    if (!best || r.passed_checks() > best->passed_checks() ||
        (r.passed_checks() == best->passed_checks() && r.candidate_id < best->candidate_id)) {
      best = &r;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

std::string to_json_line(const CandidateRecord& r) {
  json outcomes = json::array();
  for (const auto& o : r.check_outcomes) {
    outcomes.push_back(json{{"check", to_string(o.check)}, {"passed", o.passed}});
  }
  json doc{{"candidate_id", r.candidate_id},
           {"run_id", r.run_id},
           {"content_hash", r.content_hash},
           {"state", json{{"kind", to_string(r.state.kind)},
                          {"static_iterations", r.state.static_iterations},
                          {"integration_iterations", r.state.integration_iterations}}},
           {"check_outcomes", outcomes},
           {"error_summary", r.error_summary ? json(*r.error_summary) : json(nullptr)},
           {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)},
           {"created_at", r.created_at}};
  return doc.dump();
}

CandidateRecord parse_json_line(std::string_view line) {
  try {
    const json doc = json::parse(line);
    CandidateRecord r;
    r.candidate_id = doc.at("candidate_id").get<std::uint64_t>();
    r.run_id = doc.at("run_id").get<std::string>();
    r.content_hash = doc.at("content_hash").get<std::string>();
    const json& st = doc.at("state");
    const auto kind = parse_state_kind(st.at("kind").get<std::string>());
    if (!kind) throw StorageError("unknown state kind in ledger");
    r.state.kind = *kind;
    r.state.static_iterations = st.at("static_iterations").get<std::uint32_t>();
    r.state.integration_iterations = st.at("integration_iterations").get<std::uint32_t>();
    for (const auto& o : doc.at("check_outcomes")) {
      const auto check = parse_check_kind(o.at("check").get<std::string>());
      if (!check) throw StorageError("unknown check kind in ledger");
      r.check_outcomes.push_back({*check, o.at("passed").get<bool>()});
    }
    if (!doc.at("error_summary").is_null()) r.error_summary = doc["error_summary"].get<std::string>();
    if (!doc.at("parent_id").is_null()) r.parent_id = doc["parent_id"].get<std::uint64_t>();
    r.created_at = doc.at("created_at").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw StorageError(std::string("malformed ledger line: ") + e.what());
  }
}

std::string rfc3339_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t secs = system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
  return detail::format("%s.%03dZ", buf, static_cast<int>(ms));
}

Ledger::Ledger(std::filesystem::path path, Clock clock, std::vector<CandidateRecord> records)
    : path_(std::move(path)), clock_(std::move(clock)), records_(std::move(records)) {}

std::vector<CandidateRecord> Ledger::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open ledger " + path.string());
  std::vector<CandidateRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    records.push_back(parse_json_line(line));
  }
  return records;
}

Ledger Ledger::open(const std::filesystem::path& path, Clock clock) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw StorageError("cannot create ledger " + path.string() + ": " + std::strerror(errno));
  ::close(fd);
  return Ledger(path, std::move(clock), load(path));
}

std::string Ledger::begin_run() {
  std::uint64_t highest = 0;
  for (const auto& r : records_) {
    if (r.run_id.starts_with("run-")) {
      try {
        highest = std::max<std::uint64_t>(highest, std::stoull(r.run_id.substr(4)));
      } catch (const std::exception&) {
      }
    }
  }
  run_id_ = "run-" + std::to_string(highest + 1);
  return run_id_;
}

const CandidateRecord& Ledger::record(const SourceArtifact& artifact, const VersionState& state,
                                      std::vector<CheckOutcome> outcomes,
                                      std::optional<std::string> error_summary,
                                      std::optional<std::uint64_t> parent_id) {
  if (run_id_.empty()) begin_run();
  CandidateRecord r;
  r.candidate_id = records_.empty() ? 1 : records_.back().candidate_id + 1;
  r.run_id = run_id_;
  r.content_hash = artifact.content_hash.empty() ? content_hash(artifact.code)
                                                 : artifact.content_hash;
  r.state = state;
  r.check_outcomes = std::move(outcomes);
  r.error_summary = std::move(error_summary);
  if (parent_id && *parent_id >= r.candidate_id) {
    throw InvariantError("parent_id must precede the new candidate");
  }
  r.parent_id = parent_id;
  r.created_at = clock_();

  const std::string line = to_json_line(r) + "\n";
  // No O_CREAT: a ledger deleted mid-run must surface as an error.
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
  if (fd < 0) {
    throw StorageError("cannot append to ledger " + path_.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw StorageError("write to ledger failed: " + std::string(std::strerror(err)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw StorageError("fsync of ledger failed: " + std::string(std::strerror(err)));
  }
  ::close(fd);
  records_.push_back(std::move(r));
  return records_.back();
}

std::vector<CandidateRecord> Ledger::run_records() const {
  std::vector<CandidateRecord> out;
  for (const auto& r : records_) {
    if (r.run_id == run_id_) out.push_back(r);
  }
  return out;
}

std::optional<CandidateRecord> Ledger::best_prior() const {
  const auto run = run_records();
  return safegen::best_prior(run);
}

}  // namespace safegen
