#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace safegen {

/// Stages a candidate passes through. The static pipeline runs the first four
/// in declaration order; Integration is recorded in the ledger only.
enum class CheckKind { Structure = 0, Compile = 1, StyleDesign = 2, UnitTest = 3, Integration = 4 };

inline constexpr std::array<CheckKind, 4> kStaticChecks = {
    CheckKind::Structure, CheckKind::Compile, CheckKind::StyleDesign, CheckKind::UnitTest};

std::string_view to_string(CheckKind kind);
std::optional<CheckKind> parse_check_kind(std::string_view text);

}  // namespace safegen
