#pragma once

#include <stdexcept>
#include <string>

namespace mlforge {

// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a precondition (bad shapes, bad
// hyperparameters, k > n, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input file could not be turned into a dataset / prediction set / model.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string source = {}, std::size_t line = 0)
      : Error(format(what, source, line)), source_(std::move(source)), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& source, std::size_t line) {
    if (source.empty()) return what;
    if (line == 0) return source + ": " + what;
    return source + ":" + std::to_string(line) + ": " + what;
  }

  std::string source_;
  std::size_t line_;
};

}  // namespace mlforge
