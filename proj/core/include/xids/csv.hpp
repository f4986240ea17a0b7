#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace xids::csv {

/// Splits one CSV record. Double-quoted fields may contain the delimiter and
/// escaped quotes (""); embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line, char delimiter = ',');

/// Reads the next non-blank, non-comment ('#') line with any trailing '\r'
/// removed. Returns nullopt at end of stream. `line_number` is advanced by the
/// number of physical lines consumed.
std::optional<std::string> next_record(std::istream& in, std::size_t& line_number);

/// Quotes `field` if it contains the delimiter, a quote, or a newline.
std::string escape(std::string_view field, char delimiter = ',');

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

void write_record(std::ostream& out, const std::vector<std::string>& fields,
                  char delimiter = ',');

}  // namespace xids::csv
