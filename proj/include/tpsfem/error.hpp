#pragma once

#include <stdexcept>
#include <string>

namespace tpsfem {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (bad domain, bracket, flags). The CLI maps it to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was broken by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Degenerate GCV score (non-positive trace estimate).
class ScoreError : public Error {
 public:
  using Error::Error;
};

class IndicatorError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tpsfem
