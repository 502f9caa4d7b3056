#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace safegen {

struct FunctionDefinition {
  std::string name;
  std::size_t arity = 0;
  std::size_t line = 0;  // 1-based
};

/// Replaces comments, string and character literals, and preprocessor lines
/// with spaces. Newlines survive, so offsets and line numbers still line up.
std::string blank_non_code(std::string_view code);

/// File-scope definitions (a body follows the parameter list) of free
/// functions called `name`. Heuristic: declarations, calls, member and
/// qualified definitions, and anything nested in braces are skipped.
std::vector<FunctionDefinition> find_definitions(std::string_view code, std::string_view name);

/// Every file-scope function definition, for diagnostics.
std::vector<FunctionDefinition> find_all_definitions(std::string_view code);

}  // namespace safegen
