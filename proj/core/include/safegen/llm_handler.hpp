#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safegen/spec_model.hpp"

namespace safegen {

/// Prompting ladder, ordered: a run only ever moves rightwards.
enum class PromptStrategy { ZeroShot = 0, FewShot = 1, ChainOfThought = 2 };

std::string_view to_string(PromptStrategy strategy);

struct FewShotExample {
  std::string task;
  std::string solution;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

inline constexpr std::string_view kDefaultRolePreamble =
    "You are a specialized AI assistant for safety-critical automotive code "
    "generation. Answer with the complete implementation in a single fenced "
    "cpp code block.";

struct PromptContext {
  std::string role_preamble{kDefaultRolePreamble};
  std::string spec_block;
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::vector<FewShotExample> shots;
  std::optional<std::string> best_prior_solution;
  std::optional<std::string> error_feedback;

  friend bool operator==(const PromptContext&, const PromptContext&) = default;
};

struct Prompt {
  std::string text;
  std::size_t length() const noexcept { return text.size(); }
};

/// Assembles role preamble, spec block, strategy sections and feedback (in
/// that order). Throws InvariantError if the context violates the strategy
/// requirements and ContextOverflow when the result exceeds `budget_chars`.
Prompt build_prompt(const PromptContext& ctx, std::size_t budget_chars);

/// Strategy for the next candidate: ZeroShot first, FewShot while nothing has
/// passed a check (if shots exist), ChainOfThought once a prior candidate has
/// passed at least one static check.
PromptStrategy choose_strategy(std::size_t iteration, bool any_check_passed,
                               bool shots_available);

/// 64-bit FNV-1a over the code bytes, rendered as "fnv1a64:<16 hex digits>".
std::string content_hash(std::string_view code);

struct SourceArtifact {
  std::string code;
  std::string language_tag;
  std::vector<std::string> declared_dependencies;
  std::string content_hash;
};

SourceArtifact make_artifact(std::string code, std::string language_tag);

/// Targets of `#include` directives and `import` declarations, in order.
std::vector<std::string> scan_dependencies(std::string_view code);

/// Picks the last closed fenced block tagged with the target language;
/// untagged blocks are considered only when no tagged block matches.
/// Throws NoCodeFound.
SourceArtifact extract_code(std::string_view response, LanguageTarget target);

/// Headers any candidate may include regardless of the design spec.
std::span<const std::string_view> default_standard_headers();

/// Declared dependencies that are neither in the design spec nor allowlisted.
std::vector<std::string> verify_dependencies(
    const SourceArtifact& artifact, const DesignSpec& design,
    std::span<const std::string> allowlist);

std::vector<std::string> verify_dependencies(const SourceArtifact& artifact,
                                             const DesignSpec& design);

}  // namespace safegen
