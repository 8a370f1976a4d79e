#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ddpce::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);

/// Strict full-token parse; rejects trailing garbage, nan and inf.
std::optional<double> parse_finite(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);
/// Shortest representation that round-trips (for labels).
std::string format_short(double v);

}  // namespace ddpce::text
