#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safegen/check_kind.hpp"
#include "safegen/llm_handler.hpp"

namespace safegen {

enum class VersionStateKind { Draft, StaticFailed, Verified, IntegrationFailed, Safe };

inline constexpr std::array<VersionStateKind, 5> kAllStateKinds = {
    VersionStateKind::Draft, VersionStateKind::StaticFailed, VersionStateKind::Verified,
    VersionStateKind::IntegrationFailed, VersionStateKind::Safe};

std::string_view to_string(VersionStateKind kind);
std::optional<VersionStateKind> parse_state_kind(std::string_view text);

/// Position of a candidate line in the safety classification, plus the
/// static (I_S) and integration (I_I) failure counters.
struct VersionState {
  VersionStateKind kind = VersionStateKind::Draft;
  std::uint32_t static_iterations = 0;
  std::uint32_t integration_iterations = 0;

  friend bool operator==(const VersionState&, const VersionState&) = default;
};

enum class StateEvent { StaticCheckFailed, AllStaticChecksPassed, IntegrationFailed, IntegrationPassed };

inline constexpr std::array<StateEvent, 4> kAllEvents = {
    StateEvent::StaticCheckFailed, StateEvent::AllStaticChecksPassed,
    StateEvent::IntegrationFailed, StateEvent::IntegrationPassed};

std::string_view to_string(StateEvent event);

/// Successor kind, or nullopt when the pair is illegal.
///
///   Draft | StaticFailed | IntegrationFailed --StaticCheckFailed-->     StaticFailed
///   Draft | StaticFailed | IntegrationFailed --AllStaticChecksPassed--> Verified
///   Verified --IntegrationFailed--> IntegrationFailed
///   Verified --IntegrationPassed--> Safe
///
/// Safe is terminal and integration events are legal from Verified only.
std::optional<VersionStateKind> next_kind(VersionStateKind kind, StateEvent event);

/// Applies `event`, bumping I_S / I_I on failures. Throws IllegalTransition.
VersionState transition(const VersionState& state, StateEvent event);

struct CheckOutcome {
  CheckKind check;
  bool passed;

  friend bool operator==(const CheckOutcome&, const CheckOutcome&) = default;
};

struct CandidateRecord {
  std::uint64_t candidate_id = 0;
  std::string run_id;
  std::string content_hash;
  VersionState state;
  std::vector<CheckOutcome> check_outcomes;
  std::optional<std::string> error_summary;
  std::optional<std::uint64_t> parent_id;
  std::string created_at;  // RFC 3339, UTC

  std::size_t passed_checks() const;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

/// Events a record's outcomes imply, in the order they were applied.
std::vector<StateEvent> events_for(const CandidateRecord& record);

/// Folds transition() over the records of one run starting from Draft.
VersionState replay(std::span<const CandidateRecord> records);

/// Highest passed-check count, ties to the lower candidate_id.
std::optional<CandidateRecord> best_prior(std::span<const CandidateRecord> records);

std::string to_json_line(const CandidateRecord& record);
CandidateRecord parse_json_line(std::string_view line);

/// Current UTC time as RFC 3339 with millisecond precision.
std::string rfc3339_now();

/// Append-only JSON-lines candidate history. Single writer.
class Ledger {
 public:
  using Clock = std::function<std::string()>;

  /// Creates the file if absent and loads any existing records.
  static Ledger open(const std::filesystem::path& path, Clock clock = rfc3339_now);

  /// Read-only load. Throws StorageError.
  static std::vector<CandidateRecord> load(const std::filesystem::path& path);

  /// Starts a new lineage; ids are "run-<n>" with n one past the highest seen.
  std::string begin_run();

  /// Appends a record with the next candidate_id, fsync'd before returning.
  /// Throws StorageError, including when the file vanished since open().
  const CandidateRecord& record(const SourceArtifact& artifact, const VersionState& state,
                                std::vector<CheckOutcome> outcomes,
                                std::optional<std::string> error_summary,
                                std::optional<std::uint64_t> parent_id = std::nullopt);

  std::span<const CandidateRecord> records() const noexcept { return records_; }
  /// Records belonging to the current run.
  std::vector<CandidateRecord> run_records() const;
  std::optional<CandidateRecord> best_prior() const;

  const std::filesystem::path& path() const noexcept { return path_; }
  const std::string& run_id() const noexcept { return run_id_; }

 private:
  Ledger(std::filesystem::path path, Clock clock, std::vector<CandidateRecord> records);

  std::filesystem::path path_;
  Clock clock_;
  std::vector<CandidateRecord> records_;
  std::string run_id_;
};

}  // namespace safegen
