#pragma once

#include <stdexcept>
#include <string>

namespace strb {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration values, CLI arguments, malformed files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent shapes between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure, singular or ill-conditioned system.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace strb
