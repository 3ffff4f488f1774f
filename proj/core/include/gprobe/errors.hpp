#pragma once

#include <stdexcept>
#include <string>

namespace gprobe {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad shapes, missing records, empty sets.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite values or a numerically degenerate problem (rank deficiency,
/// undefined correlation).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Binary file errors. Each failure mode is its own type so callers and tests
// can tell them apart.
class IoError : public InputError {
 public:
  using InputError::InputError;
};

class BadMagicError : public IoError {
 public:
  using IoError::IoError;
};

class VersionError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedError : public IoError {
 public:
  using IoError::IoError;
};

class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace gprobe
