#pragma once

#include <stdexcept>
#include <string>

namespace soda {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension mismatch between operands (vector lengths, matrix shapes).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value (empty input, bad range, bad configuration).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Training failed (divergence, NaN loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// A timestep beyond the calibrated horizon was requested.
class HorizonError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated serialized data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (CSV); carries row/column context in the message.
class ParseError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Authenticated decryption failed: wrong key or modified ciphertext.
class TamperError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace soda
