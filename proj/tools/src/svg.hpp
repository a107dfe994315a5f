#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pinntk::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Static SVG line plot. Output depends only on the plot contents.
/// Points that cannot be drawn (non-finite, or non-positive on a log
/// axis) are skipped.
void write_svg(std::ostream& out, const Plot& plot);

}  // namespace pinntk::cli
