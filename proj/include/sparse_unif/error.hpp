#pragma once

#include <stdexcept>
#include <string>

namespace sparse_unif {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A constructed probability vector would leave the simplex.
class InfeasibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Invalid experiment or test configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File-system or parse failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparse_unif
