#ifndef NHPP_ERROR_HPP_
#define NHPP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nhpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent inputs: dimension or region mismatch, bad settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A point or argument outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Underflow, overflow or non-finite values during evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The sampler could not start from its initial state.
class InitializationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Random field or point pattern generation failed.
class GenerationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nhpp

#endif  // NHPP_ERROR_HPP_
