#pragma once

#include <stdexcept>
#include <string>

namespace fofelink {

// Base of every error raised by the library. The CLI maps the concrete
// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A hyperparameter or option outside its documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (KB, corpus, candidate or model files).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite activation or loss during training or inference.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Raised by test oracles when an assumed property is falsified, e.g. two
// distinct sequences sharing one FOFE code.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fofelink
