#pragma once

#include <stdexcept>
#include <string>

namespace polydro {

enum class ErrorKind {
  Dimension,       // vector/matrix length mismatch
  Degree,          // degree overflow or an order that is too small
  Parse,           // malformed problem text
  Semantic,        // well-formed input describing an invalid model
  Unsupported,     // valid input outside the supported patterns
  Extraction,      // atom extraction is ill-conditioned
  Solver,          // conic solver breakdown
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse error carrying a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorKind::Parse, what + " (line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace polydro
