#pragma once

#include <stdexcept>
#include <string>

namespace quantrel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (maps to CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotPsdError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BasisError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InconsistentAssemblageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SignallingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A combinatorial size (strategy count, variable count) exceeds its cap.
class ResourceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The conic solver did not reach an optimal status (maps to CLI exit code 3).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::string program_dump = {})
      : Error(what), dump_(std::move(program_dump)) {}
  const std::string& program_dump() const { return dump_; }

 private:
  std::string dump_;
};

}  // namespace quantrel
