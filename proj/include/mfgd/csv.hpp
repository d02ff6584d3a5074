#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mfgd::csv {

/// Shortest round-trip-safe rendering used for every CSV field: %.17g.
std::string format_double(double v);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Strict full-string parse; throws std::invalid_argument on junk.
double parse_double(std::string_view field);

}  // namespace mfgd::csv
