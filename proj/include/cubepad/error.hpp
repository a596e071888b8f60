#pragma once

#include <stdexcept>
#include <string>

namespace cubepad {

// Root of every error raised by the library. The CLI maps any of these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad magic, truncated payload, unsupported depth).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input carrying unacceptable values (NaN, out-of-range angles).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A self-check of a compiled-in table failed.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Statistic undefined for the input (zero variance, empty mask).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cubepad
