#pragma once

#include <stdexcept>
#include <string>

namespace plantkg {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error in a text input (documents, queries, DSL files).
// line/column are 1-based; column 0 means "whole line".
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column = 0)
      : Error(format(msg, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& msg, std::size_t line,
                            std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ":" + std::to_string(column);
    return out + ": " + msg;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace plantkg
