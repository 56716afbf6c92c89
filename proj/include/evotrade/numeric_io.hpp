#pragma once

#include <string>
#include <string_view>

namespace evotrade {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Strict decimal parse of the whole field; throws std::invalid_argument.
double parse_double(std::string_view text);

}  // namespace evotrade
