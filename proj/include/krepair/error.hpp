#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace krepair {

// Malformed user input: database files, framework files, formulas.
// Line and column are 1-based; 0 means "not known".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line);
    if (column > 0) out += std::string(out.empty() ? "" : ", ") + "column " + std::to_string(column);
    return out.empty() ? what : out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

// API misuse: mixing semirings, unknown relation names, unsupported modes.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The configured candidate budget was exhausted before the search finished.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krepair
