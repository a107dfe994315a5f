#include "pinntk/linear_operator.hpp"

#include <algorithm>
#include <sstream>

#include "pinntk/error.hpp"

namespace pinntk {

LinearOperator::LinearOperator(std::initializer_list<OperatorTerm> terms) : terms_(terms) {
  validate();
}

LinearOperator::LinearOperator(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {
  validate();
}

LinearOperator LinearOperator::identity() { return LinearOperator{{1.0, 0, 0}}; }

LinearOperator LinearOperator::derivative(std::size_t coordinate, int order, double coefficient) {
  return LinearOperator{{coefficient, coordinate, order}};
}

void LinearOperator::validate() const {
  if (terms_.empty()) {
    throw ParameterError("LinearOperator: at least one term is required");
  }
  for (const auto& term : terms_) {
    if (term.order < 0 || term.order > 2) {
      throw ParameterError("LinearOperator: derivative order " + std::to_string(term.order) +
                           " is not supported (0, 1 or 2)");
    }
  }
}

std::vector<std::size_t> LinearOperator::derivative_coordinates() const {
  std::vector<std::size_t> coords;
  for (const auto& term : terms_) {
    if (term.order > 0) {
      coords.push_back(term.coordinate);
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return coords;
}

bool LinearOperator::needs_second(std::size_t coordinate) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const OperatorTerm& t) {
    return t.order == 2 && t.coordinate == coordinate;
  });
}

std::size_t LinearOperator::max_coordinate() const {
  std::size_t out = 0;
  for (const auto& term : terms_) {
    if (term.order > 0) {
      out = std::max(out, term.coordinate);
    }
  }
  return out;
}

LinearOperator LinearOperator::operator+(const LinearOperator& other) const {
  std::vector<OperatorTerm> merged = terms_;
  merged.insert(merged.end(), other.terms_.begin(), other.terms_.end());
  return LinearOperator(std::move(merged));
}

LinearOperator LinearOperator::operator*(double scale) const {
  std::vector<OperatorTerm> scaled = terms_;
  for (auto& term : scaled) {
    term.coefficient *= scale;
  }
  return LinearOperator(std::move(scaled));
}

std::string LinearOperator::describe() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& term : terms_) {
    if (!first) {
      os << " + ";
    }
    first = false;
    os << term.coefficient;
    if (term.order == 0) {
      os << "*u";
    } else {
      os << "*d" << term.order << "u/dx" << term.coordinate;
    }
  }
  return os.str();
}

}  // namespace pinntk
