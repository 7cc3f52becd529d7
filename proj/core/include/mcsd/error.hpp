#pragma once

#include <stdexcept>
#include <string>

namespace mcsd {

/// Inconsistent configuration: mismatched dimensions, invalid tree shapes,
/// unsupported method/shape combinations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-supplied value is outside the operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input text. `line()` is 1-based, 0 when not line oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The exact oracle refuses instances beyond its enumeration bound.
class IntractableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcsd
