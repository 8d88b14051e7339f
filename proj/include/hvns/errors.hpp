#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hvns {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes (validation -> 1, runtime -> 2, I/O -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validation-class errors: the inputs violate a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidGridError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OutOfBandError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateLevelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UndefinedRatioError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// All problems found in a configuration file, each tagged with its line.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : ValidationError(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += '\n';
      out += item;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

// Runtime-class errors: the computation itself went wrong.
class RuntimeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

/// Raised by a step whose dt exceeds the advective limit.
class CflViolation : public RuntimeError {
 public:
  CflViolation(const std::string& what, double suggested_dt)
      : RuntimeError(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const { return suggested_dt_; }

 private:
  double suggested_dt_;
};

class BlowUpError : public RuntimeError {
 public:
  BlowUpError(const std::string& what, double time) : RuntimeError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hvns
