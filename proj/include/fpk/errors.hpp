#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpk {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an argument (bad dt, wrong dimension, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation produced a non-finite value or hit ln/sqrt/division outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// DSL syntax or name-resolution failure. `position` is a 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Cholesky pivot at `column` (1-based) was not strictly positive.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t column, double pivot, std::vector<double> point = {});
  std::size_t column() const noexcept { return column_; }
  double pivot() const noexcept { return pivot_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::size_t column_;
  double pivot_;
  std::vector<double> point_;
};

/// Configuration or schema violation. `pointer` is a JSON pointer into the offending document.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : Error((pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace fpk
