#ifndef CCMF_ERRORS_HPP
#define CCMF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ccmf {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller-supplied value (negative capacity, invalid threshold, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Graph violates a structural invariant (duplicate edge, disconnected, ...).
class GraphStructureError : public Error {
 public:
  using Error::Error;
};

/// Vector length does not match the graph or image it is paired with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Base class for file I/O failures.
class IoError : public Error {
 public:
  using Error::Error;
};

class MalformedHeaderError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedPayloadError : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedFormatError : public IoError {
 public:
  using IoError::IoError;
};

/// The KKT system could not be factorized even after regularization.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Backtracking shrank the step below 1e-12 without progress.
class LineSearchStallError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccmf

#endif
