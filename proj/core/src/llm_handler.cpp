#include "safegen/llm_handler.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <set>

#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

std::string_view to_string(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::ZeroShot:
      return "ZeroShot";
    case PromptStrategy::FewShot:
      return "FewShot";
    case PromptStrategy::ChainOfThought:
      return "ChainOfThought";
  }
  return "ZeroShot";
}

Prompt build_prompt(const PromptContext& ctx, std::size_t budget_chars) {
  if (ctx.strategy == PromptStrategy::FewShot && ctx.shots.empty()) {
    throw InvariantError("FewShot prompting needs at least one example");
  }
  if (ctx.strategy == PromptStrategy::ChainOfThought && !ctx.best_prior_solution) {
    throw InvariantError("ChainOfThought prompting needs a best prior solution");
  }
  // The spec block alone over budget can never be rescued by trimming.
  if (ctx.spec_block.size() > budget_chars) {
    throw ContextOverflow(ctx.spec_block.size(), budget_chars);
  }

  std::string text;
  text += ctx.role_preamble;
  text += "\n\n";
  text += ctx.spec_block;

  if (ctx.strategy == PromptStrategy::FewShot) {
    text += "\n## Examples\n";
    for (std::size_t i = 0; i < ctx.shots.size(); ++i) {
      const auto n = std::to_string(i + 1);
      text += "\n### Task " + n + "\n" + ctx.shots[i].task;
      if (!text.ends_with('\n')) text += '\n';
      text += "\n### Solution " + n + "\n```cpp\n" + ctx.shots[i].solution;
      if (!text.ends_with('\n')) text += '\n';
      text += "```\n";
    }
  }
  if (ctx.strategy == PromptStrategy::ChainOfThought) {
    text +=
        "\n## Best solution so far\n"
        "This implementation passed the most checks so far. Reason step by "
        "step about the remaining failure, then write the corrected complete "
        "implementation.\n```cpp\n";
    text += *ctx.best_prior_solution;
    if (!text.ends_with('\n')) text += '\n';
    text += "```\n";
  }
  if (ctx.error_feedback && !ctx.error_feedback->empty()) {
    text += "\n## Feedback from the previous attempt\n";
    text += *ctx.error_feedback;
    if (!text.ends_with('\n')) text += '\n';
  }

  if (text.size() > budget_chars) throw ContextOverflow(text.size(), budget_chars);
  return Prompt{std::move(text)};
}

PromptStrategy choose_strategy(std::size_t iteration, bool any_check_passed,
                               bool shots_available) {
  if (iteration <= 1) return PromptStrategy::ZeroShot;
  if (any_check_passed) return PromptStrategy::ChainOfThought;
  return shots_available ? PromptStrategy::FewShot : PromptStrategy::ZeroShot;
}

std::string content_hash(std::string_view code) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : code) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return detail::format("fnv1a64:%016llx", static_cast<unsigned long long>(h));
}

std::vector<std::string> scan_dependencies(std::string_view code) {
  static const std::regex include_re(R"(^\s*#\s*include\s*[<"]([^>"]+)[>"])");
  static const std::regex import_re(
      R"re(^\s*(?:export\s+)?import\s+(?:<([^>]+)>|"([^"]+)"|([A-Za-z_][\w.:]*))\s*;)re");
  std::vector<std::string> deps;
  std::size_t pos = 0;
  while (pos <= code.size()) {
    std::size_t nl = code.find('\n', pos);
    if (nl == std::string_view::npos) nl = code.size();
    const std::string line(code.substr(pos, nl - pos));
    std::smatch m;
    if (std::regex_search(line, m, include_re)) {
      deps.push_back(m[1].str());
    } else if (std::regex_search(line, m, import_re)) {
      for (int g = 1; g <= 3; ++g) {
        if (m[g].matched) deps.push_back(m[g].str());
      }
    }
    pos = nl + 1;
  }
  return deps;
}

SourceArtifact make_artifact(std::string code, std::string language_tag) {
  SourceArtifact a;
  a.declared_dependencies = scan_dependencies(code);
  a.content_hash = content_hash(code);
  a.code = std::move(code);
  a.language_tag = std::move(language_tag);
  return a;
}

namespace {

struct FencedBlock {
  std::string tag;
  std::string body;
};

/// Opening or closing fence: up to three spaces, then >= 3 backticks/tildes.
bool parse_fence(std::string_view line, char& fence_char, std::size_t& fence_len,
                 std::string& info) {
  std::size_t i = 0;
  while (i < line.size() && i < 3 && line[i] == ' ') ++i;
  if (i >= line.size() || (line[i] != '`' && line[i] != '~')) return false;
  const char c = line[i];
  std::size_t n = 0;
  while (i + n < line.size() && line[i + n] == c) ++n;
  if (n < 3) return false;
  fence_char = c;
  fence_len = n;
  info = detail::trim(line.substr(i + n));
  return true;
}

std::vector<FencedBlock> closed_blocks(std::string_view text) {
  std::vector<FencedBlock> blocks;
  bool inside = false;
  char open_char = 0;
  std::size_t open_len = 0;
  FencedBlock current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;

    char c = 0;
    std::size_t len = 0;
    std::string info;
    const bool fence = parse_fence(line, c, len, info);
    if (!inside) {
      if (fence) {
        inside = true;
        open_char = c;
        open_len = len;
        current = {};
        const auto space = info.find_first_of(" \t{");
        current.tag = detail::to_lower(info.substr(0, space));
      }
    } else if (fence && c == open_char && len >= open_len && info.empty()) {
      blocks.push_back(std::move(current));
      inside = false;
    } else {
      current.body.append(line);
      current.body.push_back('\n');
    }
  }
  // An unterminated trailing block is truncated output and is dropped.
  return blocks;
}

bool tag_matches(std::string_view tag, LanguageTarget target) {
  switch (target) {
    case LanguageTarget::Cpp: {
      static constexpr std::array<std::string_view, 7> kAliases = {
          "cpp", "c++", "cxx", "cc", "hpp", "hxx", "h++"};
      return std::find(kAliases.begin(), kAliases.end(), tag) != kAliases.end();
    }
  }
  return false;
}

bool usable(const FencedBlock& b) {
  if (detail::trim(b.body).empty()) return false;
  return b.body.find("```") == std::string::npos &&
         b.body.find("~~~") == std::string::npos;
}

}  // namespace

SourceArtifact extract_code(std::string_view response, LanguageTarget target) {
  const auto blocks = closed_blocks(response);
  const FencedBlock* chosen = nullptr;
  for (const auto& b : blocks) {
    if (tag_matches(b.tag, target) && usable(b)) chosen = &b;
  }
  if (!chosen) {
    for (const auto& b : blocks) {
      if (b.tag.empty() && usable(b)) chosen = &b;
    }
  }
  if (!chosen) {
    throw NoCodeFound("response contains no fenced " +
                      std::string(to_string(target)) + " code block");
  }
  return make_artifact(chosen->body, std::string(to_string(target)));
}

std::span<const std::string_view> default_standard_headers() {
  static constexpr std::string_view kHeaders[] = {
      // C++ library
      "algorithm", "any", "array", "atomic", "bit", "bitset", "cassert",
      "cctype", "cerrno", "cfloat", "charconv", "chrono", "cinttypes",
      "climits", "cmath", "compare", "complex", "concepts", "cstddef",
      "cstdint", "cstdio", "cstdlib", "cstring", "deque", "exception",
      "functional", "initializer_list", "iomanip", "ios", "iosfwd",
      "iostream", "istream", "iterator", "limits", "list", "map", "memory",
      "new", "numbers", "numeric", "optional", "ostream", "queue", "random",
      "ratio", "set", "span", "sstream", "stack", "stdexcept", "string",
      "string_view", "tuple", "type_traits", "typeinfo", "unordered_map",
      "unordered_set", "utility", "valarray", "variant", "vector", "version",
      // C compatibility
      "assert.h", "ctype.h", "float.h", "inttypes.h", "limits.h", "math.h",
      "stdbool.h", "stddef.h", "stdint.h", "stdio.h", "stdlib.h", "string.h"};
  return kHeaders;
}

std::vector<std::string> verify_dependencies(const SourceArtifact& artifact,
                                             const DesignSpec& design,
                                             std::span<const std::string> allowlist) {
  std::set<std::string, std::less<>> allowed(design.dependencies.begin(),
                                             design.dependencies.end());
  allowed.insert(allowlist.begin(), allowlist.end());
  std::vector<std::string> violations;
  for (const auto& dep : artifact.declared_dependencies) {
    if (allowed.contains(dep)) continue;
    if (std::find(violations.begin(), violations.end(), dep) == violations.end()) {
      violations.push_back(dep);
    }
  }
  return violations;
}

std::vector<std::string> verify_dependencies(const SourceArtifact& artifact,
                                             const DesignSpec& design) {
  std::vector<std::string> allowlist;
  for (auto h : default_standard_headers()) allowlist.emplace_back(h);
  return verify_dependencies(artifact, design, allowlist);
}

}  // namespace safegen
