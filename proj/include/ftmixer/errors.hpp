#pragma once

#include <stdexcept>
#include <string>

namespace ftmixer {

// Error classes map one-to-one onto CLI exit codes (see tools/ftmixer.cpp).

/// Shapes of two operands cannot be combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A hyperparameter or run configuration is invalid.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller violated an operation precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or infinity where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data is missing or unusable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace ftmixer
