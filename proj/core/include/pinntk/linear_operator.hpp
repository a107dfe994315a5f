#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace pinntk {

/// One term coefficient * d^order u / dx_coord^order.
struct OperatorTerm {
  double coefficient = 1.0;
  std::size_t coordinate = 0;
  int order = 0;  // 0, 1 or 2
};

/// Linear differential operator built from pure per-coordinate derivatives.
class LinearOperator {
 public:
  LinearOperator() = default;
  LinearOperator(std::initializer_list<OperatorTerm> terms);
  explicit LinearOperator(std::vector<OperatorTerm> terms);

  static LinearOperator identity();
  static LinearOperator derivative(std::size_t coordinate, int order, double coefficient = 1.0);

  const std::vector<OperatorTerm>& terms() const { return terms_; }

  /// Coordinates that need first-derivative propagation, ascending.
  std::vector<std::size_t> derivative_coordinates() const;
  /// True when some term differentiates twice along coordinate.
  bool needs_second(std::size_t coordinate) const;
  std::size_t max_coordinate() const;

  LinearOperator operator+(const LinearOperator& other) const;
  LinearOperator operator*(double scale) const;

  std::string describe() const;

 private:
  void validate() const;
  std::vector<OperatorTerm> terms_;
};

}  // namespace pinntk
