#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bisonet {

// RFC-4180 record: quoted fields may contain commas, doubled quotes, and
// newlines. `line` is the 1-based line the record starts on.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// Parses a whole CSV document. Throws std::runtime_error (naming the line)
// on an unterminated quoted field.
std::vector<CsvRecord> parse_csv(std::string_view content);

// Quotes the field only when it contains a comma, quote, or newline.
std::string csv_field(std::string_view value);

std::string csv_row(const std::vector<std::string>& fields);

}  // namespace bisonet
