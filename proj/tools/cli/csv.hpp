#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ordlatent::cli {

/// Splits one CSV record on commas. Double-quoted fields may contain commas
/// and doubled quotes. Throws std::invalid_argument on an unterminated quote.
std::vector<std::string> split_csv(std::string_view line);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view s);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Removes a trailing carriage return and, on the first line, a UTF-8 BOM.
void strip_line(std::string& line, bool first);

}  // namespace ordlatent::cli
