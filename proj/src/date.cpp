#include "evotrade/date.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace evotrade {

namespace {

int parse_field(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("malformed date '{}'", whole));
  }
  return value;
}

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return month == 2 && is_leap(year) ? 29 : kDays[month - 1];
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument(fmt::format("malformed date '{}'", text));
  }
  Date date{parse_field(text.substr(0, 4), text), parse_field(text.substr(5, 2), text),
            parse_field(text.substr(8, 2), text)};
  if (date.month < 1 || date.month > 12 || date.day < 1 ||
      date.day > days_in_month(date.year, date.month)) {
    throw std::invalid_argument(fmt::format("invalid calendar date '{}'", text));
  }
  return date;
}

std::string to_string(const Date& date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", date.year, date.month, date.day);
}

}  // namespace evotrade
