#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reflab::strings {

std::string trim(std::string_view s);

// Canonical form for refactoring-type names: uppercase, trimmed, runs of
// whitespace and underscores collapsed to single spaces.
// "extract_variable" and " EXTRACT  VARIABLE " both map to "EXTRACT VARIABLE".
std::string normalize_type_name(std::string_view name);

std::vector<std::string> split_lines(std::string_view text);

// Replaces every occurrence of `needle` in `text`.
std::string replace_all(std::string_view text, std::string_view needle,
                        std::string_view replacement);

bool starts_with(std::string_view text, std::string_view prefix);
bool contains(std::string_view text, std::string_view needle);

} // namespace reflab::strings
