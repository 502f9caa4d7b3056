#include "safegen/signature_matcher.hpp"

#include <algorithm>
#include <array>

namespace safegen {

namespace {

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Names that look like calls at file scope but never start a definition.
constexpr std::array<std::string_view, 12> kNotFunctions = {
    "if",       "while",       "for",      "switch",        "return",   "sizeof",
    "decltype", "static_assert", "alignas", "noexcept",     "alignof",  "catch"};

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && space(s[i])) ++i;
  return i;
}

/// Index one past the bracket matching s[open], or npos.
std::size_t match_close(std::string_view s, std::size_t open) {
  const char o = s[open];
  const char c = o == '(' ? ')' : o == '[' ? ']' : '}';
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == o) ++depth;
    if (s[i] == c && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::size_t count_params(std::string_view params) {
  std::size_t b = 0, e = params.size();
  while (b < e && space(params[b])) ++b;
  while (e > b && space(params[e - 1])) --e;
  params = params.substr(b, e - b);
  if (params.empty() || params == "void") return 0;
  std::size_t n = 1;
  int depth = 0;
  for (char ch : params) {
    if (ch == '(' || ch == '[' || ch == '{' || ch == '<') ++depth;
    if (ch == ')' || ch == ']' || ch == '}' || ch == '>') depth = std::max(0, depth - 1);
    if (ch == ',' && depth == 0) ++n;
  }
  return n;
}

/// After the parameter list: true iff a body opens before anything that ends
/// a declaration or expression.
bool body_follows(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    const char ch = s[i];
    if (ch == '{') return true;
    if (ch == ';' || ch == '=' || ch == '}' || ch == ')') return false;
    if (ch == '(' || ch == '[') {
      i = match_close(s, i);
      if (i == std::string_view::npos) return false;
      continue;
    }
    if (ident_char(ch) || space(ch) || ch == '<' || ch == '>' || ch == ':' || ch == '*' ||
        ch == '&' || ch == '-' || ch == ',') {
      ++i;
      continue;
    }
    return false;
  }
  return false;
}

std::size_t line_of(std::string_view s, std::size_t pos) {
  return 1 + static_cast<std::size_t>(std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

}  // namespace

std::string blank_non_code(std::string_view code) {
  std::string out(code);
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < out.size(); ++k) {
      if (out[k] != '\n') out[k] = ' ';
    }
  };
  bool line_start = true;
  std::size_t i = 0;
  while (i < code.size()) {
    const char ch = code[i];
    if (line_start && ch == '#') {
      std::size_t j = i;
      while (j < code.size() && code[j] != '\n') {
        if (code[j] == '\\' && j + 1 < code.size() && code[j + 1] == '\n') ++j;
        ++j;
      }
      blank(i, j);
      i = j;
      continue;
    }
    if (ch == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (!space(ch)) line_start = false;
    if (ch == '/' && i + 1 < code.size() && code[i + 1] == '/') {
      std::size_t j = code.find('\n', i);
      if (j == std::string_view::npos) j = code.size();
      blank(i, j);
      i = j;
    } else if (ch == '/' && i + 1 < code.size() && code[i + 1] == '*') {
      std::size_t j = code.find("*/", i + 2);
      j = j == std::string_view::npos ? code.size() : j + 2;
      blank(i, j);
      i = j;
    } else if (ch == 'R' && i + 1 < code.size() && code[i + 1] == '"' &&
               (i == 0 || !ident_char(code[i - 1]))) {
      const std::size_t paren = code.find('(', i + 2);
      if (paren == std::string_view::npos) {
        blank(i, code.size());
        break;
      }
      const std::string terminator = ")" + std::string(code.substr(i + 2, paren - i - 2)) + "\"";
      std::size_t j = code.find(terminator, paren);
      j = j == std::string_view::npos ? code.size() : j + terminator.size();
      blank(i, j);
      i = j;
    } else if (ch == '"' || (ch == '\'' && !(i > 0 && ident_char(code[i - 1]) &&
                                             i + 1 < code.size() && ident_char(code[i + 1])))) {
      // The second condition leaves digit separators (1'000) alone.
      std::size_t j = i + 1;
      while (j < code.size() && code[j] != ch && code[j] != '\n') {
        if (code[j] == '\\') ++j;
        ++j;
      }
      j = std::min(j + 1, code.size());
      blank(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<FunctionDefinition> find_all_definitions(std::string_view code) {
  const std::string text = blank_non_code(code);
  const std::string_view s = text;
  std::vector<FunctionDefinition> out;
  int depth = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const char ch = s[i];
    if (ch == '{') {
      ++depth;
      ++i;
      continue;
    }
    if (ch == '}') {
      depth = std::max(0, depth - 1);
      ++i;
      continue;
    }
    if (!ident_start(ch) || (i > 0 && ident_char(s[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < s.size() && ident_char(s[end])) ++end;
    const std::string_view name = s.substr(i, end - i);
    const std::size_t start = i;
    i = end;
    if (depth != 0) continue;
    if (std::find(kNotFunctions.begin(), kNotFunctions.end(), name) != kNotFunctions.end()) continue;
    const std::size_t open = skip_space(s, end);
    if (open >= s.size() || s[open] != '(') continue;

    std::size_t before = start;
    while (before > 0 && space(s[before - 1])) --before;
    if (before > 0) {
      const char p = s[before - 1];
      if (p == '.' || p == '~') continue;
      if (p == '>' && before > 1 && s[before - 2] == '-') continue;
      if (p == ':' && before > 1 && s[before - 2] == ':') continue;
    }
    const std::size_t close = match_close(s, open);
    if (close == std::string_view::npos) break;
    if (!body_follows(s, close)) continue;
    out.push_back({std::string(name), count_params(s.substr(open + 1, close - open - 2)),
                   line_of(s, start)});
    i = close;
  }
  return out;
}

std::vector<FunctionDefinition> find_definitions(std::string_view code, std::string_view name) {
  auto all = find_all_definitions(code);
  std::erase_if(all, [&](const FunctionDefinition& d) { return d.name != name; });
  return all;
}

}  // namespace safegen
