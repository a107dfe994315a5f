#include "pinntk/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "pinntk/error.hpp"

namespace pinntk {

std::string format_number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(&out), columns_(header.size()) {
  if (header.empty()) {
    throw ParameterError("CsvWriter: header must name at least one column");
  }
  std::vector<CsvCell> cells(header.begin(), header.end());
  row(cells);
}

void CsvWriter::row(std::initializer_list<CsvCell> cells) {
  row(std::vector<CsvCell>(cells));
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) {
    throw DimensionError("CsvWriter: row has " + std::to_string(cells.size()) +
                         " fields, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      *out_ << ',';
    }
    *out_ << cells[i].text;
  }
  *out_ << "\n";
}

}  // namespace pinntk
