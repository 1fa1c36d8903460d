#pragma once

#include <stdexcept>
#include <string>

namespace uosf {

// Base class for every error raised by the library. The subclasses map onto
// the failure categories callers are expected to distinguish (the CLI turns
// ConfigError into exit code 2 and IngestionError into exit code 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values or mismatched dimensions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Index outside a valid range (e.g. a frame that does not fit in the series).
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable numeric data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Operation not valid for the current state (e.g. not enough history).
class StateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class OutputError : public Error {
 public:
  using Error::Error;
};

}  // namespace uosf
