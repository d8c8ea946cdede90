#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radtrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (weights, dimensions, scenario parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates an operation's preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed line in a line-delimited file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace radtrack
