#pragma once

#include <stdexcept>
#include <string>

namespace quietgait {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed user input: bad config file, bad CLI value, bad model file.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// File-level parse failure (JSON, WAV, checkpoint). Message carries the path.
class ParseError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

/// Simulation state became non-finite; message names the offending quantity.
class DivergedError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint does not match the requested network/environment shapes.
class CheckpointMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace quietgait
