#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace smilecal::csv {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_fields(std::string_view line);
/// Non-empty lines not starting with '#', with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text);
/// Throws ParseError naming `line` when `text` is not a complete number.
double parse_number(std::string_view text, std::size_t line);

}  // namespace smilecal::csv
