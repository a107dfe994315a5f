#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace pinntk {

/// Shape or dimension mismatch between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise unusable numeric data.
class DataError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Out-of-range configuration value (order 0, non-positive rate, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every eigenvalue of a kernel fell below the pseudo-inverse threshold.
class DegenerateKernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite or exploding loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningSink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace pinntk
