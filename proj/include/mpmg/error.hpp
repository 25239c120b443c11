#pragma once

#include <stdexcept>
#include <string>

namespace mpmg {

/// Invalid input, violated precondition, or I/O failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical failure: divergence, a violated hypothesis of a bound,
/// a matrix that is not SPD. The CLI maps these to exit code 2.
class MathError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpmg
