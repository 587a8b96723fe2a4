#pragma once

#include <stdexcept>
#include <string>

namespace parea {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix of the wrong dimension (odd length for star, etc.).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain of an operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A user evaluator threw or produced non-finite output.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Grid spacing too coarse for the requested domain.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Operation requires an interior node but got a boundary or exterior one.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

/// Regularized normal requested at a point where it is undefined.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Closed-form construction is internally inconsistent (gaps, overlaps).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Configuration could not be parsed; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace parea
