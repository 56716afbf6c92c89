#include "evotrade/numeric_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace evotrade {

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buffer.data(), ptr);
}

double parse_double(std::string_view text) {
  // from_chars rejects a leading '+'; accept it for hand-written files.
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("malformed number '{}'", text));
  }
  return value;
}

}  // namespace evotrade
