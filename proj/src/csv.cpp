#include "bisonet/csv.hpp"

#include <stdexcept>

namespace bisonet {

std::vector<CsvRecord> parse_csv(std::string_view content) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  current.line = 1;
  std::string field;
  bool in_quotes = false;
  bool record_has_data = false;
  std::size_t line_no = 1;

  const auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  const auto end_record = [&] {
    if (record_has_data || !current.fields.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current = {};
    current.line = line_no;
    record_has_data = false;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (c == '\n') ++line_no;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        record_has_data = true;
        break;
      case ',':
        end_field();
        record_has_data = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        record_has_data = true;
    }
  }
  if (in_quotes) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": unterminated quoted field");
  }
  end_record();
  return records;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace bisonet
