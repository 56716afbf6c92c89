#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace evotrade {

/// Calendar day. Ordering is chronological.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;
};

/// Parses YYYY-MM-DD. Throws std::invalid_argument on anything else.
Date parse_date(std::string_view text);
std::string to_string(const Date& date);

}  // namespace evotrade
