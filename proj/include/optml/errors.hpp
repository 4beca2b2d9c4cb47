#pragma once

#include <stdexcept>
#include <string>

namespace optml {

// Shape mismatch between matrix operands; the message names both shapes.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric precondition on an input value is violated (sigma <= 0,
// arbitrage bounds, bad flag value...). The message names the field and
// the violated condition.
struct ParameterError : std::runtime_error {
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or missing input data: files, rows, table gaps.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A computation produced a non-finite value or an undefined quantity.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace optml
