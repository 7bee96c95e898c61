#include "smilecal/dates.hpp"

#include <charconv>
#include <cstdio>

#include "smilecal/error.hpp"

namespace smilecal {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ParseError("malformed date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  const std::string_view whole = text;
  char separator = 0;
  for (char c : text) {
    if (c == '/' || c == '-' || c == '.') {
      separator = c;
      break;
    }
  }
  if (separator == 0) throw ParseError("malformed date '" + std::string(whole) + "'");

  const auto first = text.find(separator);
  const auto second = text.find(separator, first + 1);
  if (second == std::string_view::npos || text.find(separator, second + 1) != std::string_view::npos) {
    throw ParseError("malformed date '" + std::string(whole) + "'");
  }
  const int day = parse_int(text.substr(0, first), whole);
  const int month = parse_int(text.substr(first + 1, second - first - 1), whole);
  const auto year_text = text.substr(second + 1);
  int year = parse_int(year_text, whole);
  if (year_text.size() == 2) {
    year += 2000;
  } else if (year_text.size() != 4) {
    throw ParseError("malformed date '" + std::string(whole) + "'");
  }

  const Date date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                  std::chrono::day{static_cast<unsigned>(day)}};
  if (!date.ok()) throw ParseError("invalid calendar date '" + std::string(whole) + "'");
  return date;
}

std::string format_date(const Date& date) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%02u/%02u/%04d", static_cast<unsigned>(date.day()),
                static_cast<unsigned>(date.month()), static_cast<int>(date.year()));
  return buffer;
}

double year_fraction(const Date& from, const Date& to) {
  const auto days = (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
  return static_cast<double>(days) / 365.0;
}

Date add_months(const Date& date, int months) {
  auto shifted = std::chrono::year_month_day{date.year() / date.month() / 1} + std::chrono::months{months};
  Date result{shifted.year(), shifted.month(), date.day()};
  if (!result.ok()) result = shifted.year() / shifted.month() / std::chrono::last;
  return result;
}

}  // namespace smilecal
