#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace desksmt {

// Base of every error the library throws. The CLI maps the subclasses onto
// exit codes: UsageError -> 1, DataError -> 2, InvariantError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data. Carries the file and line when known.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
  DataError(const std::string& file, std::size_t line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

// A library invariant was violated; always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace desksmt
