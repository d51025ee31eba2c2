#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

// One CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view value);
// Joined fields plus a trailing newline.
std::string csv_line(std::span<const std::string> fields);
std::string csv_line(std::initializer_list<std::string> fields);

// Shortest round-trip decimal for a double ("14", "52.5", "0.333333333333").
std::string format_number(double value, int precision = 12);

}  // namespace leakscope
