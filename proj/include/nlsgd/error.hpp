#pragma once

#include <stdexcept>
#include <string>

namespace nlsgd {

// Base of every exception thrown by the core. The C API maps each subclass
// onto one nlsgd_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input: dimension mismatch, out-of-range parameter, malformed model.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this variant (e.g. positivity radius of a mixture).
class Unsupported : public Error {
 public:
  using Error::Error;
};

// Config file could not be parsed or is semantically invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Internal numeric invariant broken (e.g. rejection envelope exceeded).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlsgd
