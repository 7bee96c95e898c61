#include "csv.hpp"

#include <charconv>
#include <string>

#include "smilecal/error.hpp"

namespace smilecal::csv {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = trim(text.substr(start, end - start));
    ++number;
    if (!line.empty() && line.front() != '#') lines.emplace_back(number, line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

double parse_number(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("line " + std::to_string(line) + ": malformed number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace smilecal::csv
