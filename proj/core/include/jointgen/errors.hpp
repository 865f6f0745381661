#pragma once

#include <stdexcept>
#include <string>

namespace jointgen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer extents do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A softmax mask left no position selectable.
class InvalidMaskError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Token, character or output id outside its vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document (JSON, predictions, reports).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file has the wrong layout, version, or dimensionality.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message names the file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace jointgen
