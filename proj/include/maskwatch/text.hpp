#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace maskwatch {

/// Fixed 6-significant-digit rendering used for every numeric CSV field.
std::string fmt6(double v);

/// Splits one CSV line on commas. Quoting is not supported; fields are trimmed of a
/// trailing carriage return only.
std::vector<std::string> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

} // namespace maskwatch
