#pragma once

#include <stdexcept>
#include <string>

namespace sinkbond {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed configuration, violated contract, bad index.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result (no bracket, invalid
/// lattice probabilities, failed calibration).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sinkbond
