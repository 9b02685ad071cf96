#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankwatch {

enum class ErrorKind {
  kInvalidInput,
  kDegenerateInput,
  kInvalidConfig,
  kParse,
  kRange,
  kStream,
  kNoRoot,
  kBracket,
  kUnsupportedDimension,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed stream or matrix file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rankwatch
