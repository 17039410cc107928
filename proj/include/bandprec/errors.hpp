#pragma once

#include <stdexcept>
#include <string>

namespace bandprec {

// Raised when a Cholesky pivot falls below 1e-14 * max diagonal entry.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a rank-1 inverse update hits a pivot <= 1e-14.
class DegenerateUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidAxis : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bandprec
