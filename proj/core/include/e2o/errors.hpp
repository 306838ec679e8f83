#pragma once

#include <stdexcept>
#include <string>

namespace e2o {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or vector widths that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter, enumeration value or incompatible run settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values surfaced during training or evaluation.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked on an object in the wrong state (e.g. sampling an empty buffer).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Dataset or reference-policy generation could not produce usable output.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace e2o
