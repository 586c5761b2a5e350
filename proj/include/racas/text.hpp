#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers.
namespace racas::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
// Shortest round-trippable decimal rendering ("2", "0.5", "300").
std::string format_number(double v);

}  // namespace racas::text
