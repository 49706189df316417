#pragma once

#include <stdexcept>
#include <string>

namespace rca {

// Input violates a documented precondition or file schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced non-finite values or otherwise failed numerically.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rca
