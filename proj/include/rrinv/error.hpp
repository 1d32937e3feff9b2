#pragma once

#include <stdexcept>
#include <string>

namespace rrinv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  /// Pipeline stage that raised the error, empty if not recorded. The
  /// innermost stage wins.
  const std::string& stage() const { return stage_; }
  void set_stage(std::string stage) {
    if (stage_.empty()) stage_ = std::move(stage);
  }

 private:
  std::string stage_;
};

/// Malformed input: files, configs, grids that do not match.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An operation was called outside the regime where it is defined.
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Overflow, non-convergence, ill-conditioning, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace rrinv
