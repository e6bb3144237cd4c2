#pragma once

#include <stdexcept>
#include <string>

namespace conq {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value is outside the mathematical domain of an operation
// (non-positive metric value, probability outside (0, 1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration: bucket count, bootstrap count, grid spec, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data cannot support the requested computation.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace conq
