#pragma once

#include <stdexcept>
#include <string>

namespace dner {

// Error taxonomy mirrored by the CLI exit codes: usage -> 2, data -> 3,
// numeric -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad flags, bad config values, inconsistent options.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input files, I/O failures.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required (diverged training etc.).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Incompatible tensor shapes or out-of-range indices inside the numeric core.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace dner
