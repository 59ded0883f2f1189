#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracrb {

/// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidParameter,
  Parse,
  Validation,
  SolverFailure,
  SingularMatrix,
  Format,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
public:
  explicit InvalidParameter(const std::string &what)
      : Error(ErrorKind::InvalidParameter, what) {}
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string &what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string &what)
      : Error(ErrorKind::Validation, what) {}
};

/// Iterative or direct solve did not meet its residual contract.
class SolverFailure : public Error {
public:
  SolverFailure(const std::string &what, double residual)
      : Error(ErrorKind::SolverFailure, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class SingularMatrix : public Error {
public:
  explicit SingularMatrix(const std::string &what)
      : Error(ErrorKind::SingularMatrix, what) {}
};

/// Binary/text file format problems: bad magic, version, checksum, truncation.
class FormatError : public Error {
public:
  explicit FormatError(const std::string &what)
      : Error(ErrorKind::Format, what) {}
};

} // namespace fracrb
