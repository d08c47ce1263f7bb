#pragma once

#include <stdexcept>
#include <string>

namespace densitree {

// Exception hierarchy. The CLI maps each kind onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or invalid arguments (exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Input parses but is numerically degenerate, e.g. a zero-variance column (exit code 3).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed (exit code 4).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace densitree
