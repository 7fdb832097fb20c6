#pragma once

#include <stdexcept>
#include <string>

namespace gsnmf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent dimensions, out-of-range indices, bad permutations.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid numeric input: negative entries where nonnegativity is required,
// non-finite values, out-of-domain parameters.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The matrix cannot be equilibrated (an all-zero row or column).
class ScalingError : public Error {
 public:
  using Error::Error;
};

// Malformed matrix or JSON file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsnmf
