#include <doctest.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"

using namespace pinntk;

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = normal(rng) * std::pow(10.0, i % 40 - 20);
    const std::string s = format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("csv escaping and column checks") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

  std::ostringstream out;
  CsvWriter w(out, {"name", "value", "count"});
  w.row({"x,y", 1.25, 3});
  w.row(std::vector<CsvCell>{"z", -0.0, std::size_t{7}});
  CHECK_THROWS_AS(w.row({"only"}), DimensionError);
  CHECK(out.str() == "name,value,count\n\"x,y\",1.25,3\nz,-0,7\n");
}
