#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <vector>

namespace pinntk {

/// Shortest decimal text that round-trips the double.
std::string format_number(double v);

/// Quotes a field when it holds a comma, quote, CR or LF (RFC 4180).
std::string csv_escape(const std::string& field);

/// One CSV cell, converted to text on construction.
struct CsvCell {
  std::string text;

  CsvCell(std::string s) : text(csv_escape(s)) {}
  CsvCell(const char* s) : text(csv_escape(s)) {}
  CsvCell(double v) : text(format_number(v)) {}
  template <typename I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
  CsvCell(I v) : text(std::to_string(v)) {}
};

/// Header-first CSV writer that rejects rows with the wrong column count.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  void row(std::initializer_list<CsvCell> cells);
  void row(const std::vector<CsvCell>& cells);
  std::size_t columns() const { return columns_; }

 private:
  std::ostream* out_;
  std::size_t columns_;
};

}  // namespace pinntk
