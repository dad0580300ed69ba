#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace denom {

std::vector<std::string_view> split(std::string_view line, char sep);

// Strict integer/double parsing: the whole field must be consumed.
std::optional<long long> parse_int(std::string_view field);
std::optional<double> parse_double(std::string_view field);

// %.17g — lossless double round-trip, the format every CSV in this project uses.
std::string format_g17(double value);

std::string to_lower(std::string_view s);

// Count of ASCII alphabetic characters.
int alpha_length(std::string_view word);

}  // namespace denom
