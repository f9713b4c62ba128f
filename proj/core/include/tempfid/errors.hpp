#pragma once

#include <stdexcept>

namespace tempfid {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is out of its documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violates the dataset contract (parse failures, missing
/// variables, non-finite values, mismatched dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A metric was requested for a variable of the wrong kind.
class KindError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace tempfid
