#pragma once

// Small ASCII string helpers shared across modules.

#include <string>
#include <string_view>
#include <vector>

namespace modconf::text {

bool is_space(char c);
bool is_ascii_punct(char c);
std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::string collapse_spaces(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view separator);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

// Position of the last case-insensitive occurrence of `needle`, or npos.
std::size_t rfind_icase(std::string_view haystack, std::string_view needle);

}  // namespace modconf::text
