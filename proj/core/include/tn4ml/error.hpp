#pragma once

#include <stdexcept>
#include <string>

namespace tn4ml {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index dimensions disagree, or an index/label is malformed.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ContractionError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

class PathError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain an operation accepts.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or a degenerate (zero-norm) quantity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tn4ml
