#pragma once

#include <stdexcept>
#include <string>

namespace fedload {

// Every error raised by the library carries a short machine-readable kind
// ("unknown-entity", "parse", ...) which the CLI prints verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class UnknownEntityError : public Error {
 public:
  explicit UnknownEntityError(const std::string& what) : Error("unknown-entity", what) {}
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what) : Error("invalid-argument", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error("parse", format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string s = "line " + std::to_string(line);
    if (column != 0) s += ", column " + std::to_string(column);
    return s + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class InternalConsistencyError : public Error {
 public:
  explicit InternalConsistencyError(const std::string& what) : Error("internal-consistency", what) {}
};

class InfeasibleConfigError : public Error {
 public:
  explicit InfeasibleConfigError(const std::string& what) : Error("infeasible-config", what) {}
};

}  // namespace fedload
