#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace analogwave {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Renders a fraction in [0, 1] as a percentage with one decimal, e.g. "36.4".
std::string format_percent(double fraction);

/// Strict decimal parse (whole field must be consumed). Returns nullopt on failure.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string read_file(const std::string& path);
/// Writes through a temporary sibling and renames, so readers never see partial files.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace analogwave
