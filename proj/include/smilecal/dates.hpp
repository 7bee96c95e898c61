#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace smilecal {

using Date = std::chrono::year_month_day;

/// Accepts DD/MM/YYYY, DD.MM.YYYY and DD-MM-YY (two-digit years map to 20YY).
Date parse_date(std::string_view text);

/// DD/MM/YYYY.
std::string format_date(const Date& date);

/// ACT/365-fixed year fraction; negative when `to` precedes `from`.
double year_fraction(const Date& from, const Date& to);

Date add_months(const Date& date, int months);

}  // namespace smilecal
