#pragma once

#include <stdexcept>
#include <string>

namespace hmr {

// Base of every exception thrown by the core library. The C API maps each
// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument, out-of-range option or mismatched dimensions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV parse errors, missing columns).
class DataError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a failed decomposition.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on an object that is not ready for it (untrained model).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmr
