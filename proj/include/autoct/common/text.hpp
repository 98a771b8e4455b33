#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace autoct {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool iequals(std::string_view a, std::string_view b);

/// Formats a double so that parsing it back yields the same bits.
std::string format_exact(double v);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);
/// Parses RFC 4180 CSV (quoted fields may span lines). Trailing CR is dropped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Atomically replaces `path` with `contents` (write to a sibling temp file, then rename).
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace autoct
